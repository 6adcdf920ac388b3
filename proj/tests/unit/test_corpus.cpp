#include <doctest.h>

#include <algorithm>
#include <iterator>
#include <set>
#include <sstream>

#include "linkcloze/corpus.hpp"
#include "linkcloze/errors.hpp"
#include "linkcloze/synthetic.hpp"

using namespace linkcloze;

namespace {

Corpus grid(std::size_t issues, std::size_t commits) {
  Corpus c;
  for (std::size_t i = 0; i < issues; ++i) c.add_issue({"I" + std::to_string(i), "issue text " + std::to_string(i)});
  for (std::size_t j = 0; j < commits; ++j) {
    c.add_commit({"C" + std::to_string(j), "message " + std::to_string(j), "code(" + std::to_string(j) + ");"});
  }
  return c;
}

std::vector<LinkExample> numbered(std::size_t n) {
  std::vector<LinkExample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"I" + std::to_string(i), "C" + std::to_string(i), int(i % 2)});
  return out;
}

using PairSet = std::set<std::pair<std::string, std::string>>;

PairSet pairs_of(const std::vector<LinkExample>& links) {
  PairSet out;
  for (const auto& l : links) out.emplace(l.issue_id, l.commit_id);
  return out;
}

}  // namespace

TEST_CASE("corpus round-trips through JSON lines") {
  Corpus c = grid(3, 2);
  c.add_link({"I0", "C0", 1});
  c.add_link({"I1", "C1", 1});
  c.add_link({"I2", "C0", 0});
  c.add_issue({"I\"q", "quote \" and\nnewline \\ unicode \xc3\xa9"});

  std::stringstream buffer;
  write_corpus(c, buffer);
  const Corpus back = parse_corpus(buffer);
  CHECK(back.issues() == c.issues());
  CHECK(back.commits() == c.commits());
  CHECK(back.links() == c.links());
  CHECK(back.true_link_count() == 2);
  CHECK(back.false_link_count() == 1);
}

TEST_CASE("empty input yields an empty corpus") {
  std::istringstream in("");
  const Corpus c = parse_corpus(in);
  CHECK(c.issues().empty());
  CHECK(c.commits().empty());
  CHECK(c.links().empty());
}

TEST_CASE("records may reference artifacts declared later") {
  std::istringstream in(
      R"({"kind":"link","issue_id":"A","commit_id":"b","label":1})"
      "\n"
      R"({"kind":"issue","issue_id":"A","description":"d"})"
      "\n\n"
      R"({"kind":"commit","commit_id":"b","message":"m","code":"c"})"
      "\n");
  const Corpus c = parse_corpus(in);
  CHECK(c.links().size() == 1);
  CHECK(c.has_pair("A", "b"));
}

TEST_CASE("malformed records report their line") {
  const std::string issue = R"({"kind":"issue","issue_id":"A","description":"d"})";
  const std::vector<std::pair<std::string, std::size_t>> cases = {
      {issue + "\n{not json", 2},
      {issue + "\n" + R"({"kind":"issue","issue_id":"B"})", 2},
      {R"({"kind":"mystery"})", 1},
      {"[1,2]", 1},
      {issue + "\n\n" + R"({"kind":"commit","commit_id":"c","message":"m","code":3})", 3},
  };
  for (const auto& [text, line] : cases) {
    std::istringstream in(text);
    try {
      parse_corpus(in);
      FAIL("expected ParseError for: " << text);
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(std::string(e.what()).find("line " + std::to_string(line)) != std::string::npos);
    }
  }
}

TEST_CASE("dangling references and duplicates are integrity errors") {
  std::istringstream dangling(
      R"({"kind":"issue","issue_id":"A","description":"d"})"
      "\n"
      R"({"kind":"link","issue_id":"A","commit_id":"ghost","label":1})");
  try {
    parse_corpus(dangling);
    FAIL("expected IntegrityError");
  } catch (const IntegrityError& e) {
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }

  Corpus c = grid(1, 1);
  c.add_link({"I0", "C0", 1});
  CHECK_THROWS_AS(c.add_link({"I0", "C0", 0}), IntegrityError);
  CHECK_THROWS_AS(c.add_issue({"I0", "again"}), IntegrityError);
  CHECK_THROWS_AS(c.add_commit({"C0", "again", ""}), IntegrityError);
  CHECK_THROWS_AS(c.add_link({"I0", "C9", 1}), IntegrityError);
}

TEST_CASE("generate_negatives exhausts a small grid") {
  Corpus c = grid(2, 2);
  c.add_link({"I0", "C0", 1});
  c.add_link({"I1", "C1", 1});
  const auto negatives = generate_negatives(c, 1.0, 7);
  CHECK(pairs_of(negatives) == PairSet{{"I0", "C1"}, {"I1", "C0"}});
  for (const auto& n : negatives) CHECK(n.label == 0);

  CHECK(generate_negatives(c, 0.0, 7).empty());
  CHECK_THROWS_AS(generate_negatives(c, 1.5, 7), CapacityError);
  CHECK_THROWS_AS(generate_negatives(c, -1.0, 7), ConfigError);
}

TEST_CASE("generate_negatives matches a 266 / 866 class balance") {
  const Corpus c = make_shaped_corpus({.issues = 239, .commits = 115, .true_links = 266, .false_links = 0, .seed = 3});
  REQUIRE(c.true_link_count() == 266);
  const auto negatives = generate_negatives(c, 866.0 / 266.0, 11);
  CHECK(negatives.size() == 866);
  CHECK(pairs_of(negatives).size() == 866);
  for (const auto& n : negatives) CHECK_FALSE(c.has_pair(n.issue_id, n.commit_id));
  CHECK(generate_negatives(c, 866.0 / 266.0, 11) == negatives);
}

TEST_CASE("generate_negatives property: distinct unlabelled pairs, floor count") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t issues = 3 + seed % 5;
    const std::size_t commits = 2 + seed % 4;
    Corpus c = grid(issues, commits);
    const std::size_t trues = std::min(issues, commits);
    for (std::size_t k = 0; k < trues; ++k) c.add_link({"I" + std::to_string(k), "C" + std::to_string(k), 1});
    const double ratio = 0.25 * static_cast<double>(seed % 6);
    const auto expected = static_cast<std::size_t>(ratio * static_cast<double>(trues));
    if (expected > issues * commits - trues) continue;
    const auto negatives = generate_negatives(c, ratio, seed);
    CHECK(negatives.size() == expected);
    CHECK(pairs_of(negatives).size() == expected);
    for (const auto& n : negatives) CHECK_FALSE(c.has_pair(n.issue_id, n.commit_id));
  }
}

TEST_CASE("split sizes follow the floor policy") {
  const std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> cases = {
      {100, 80, 10, 10}, {1132, 905, 113, 114}, {10, 8, 1, 1}, {19, 15, 1, 3}};
  for (const auto& [n, tr, va, te] : cases) {
    const auto s = split(numbered(n), 5);
    CHECK(s.train.size() == tr);
    CHECK(s.valid.size() == va);
    CHECK(s.test.size() == te);
  }
  CHECK_THROWS_AS(split(numbered(9), 5), SizeError);
}

TEST_CASE("split is a deterministic partition") {
  const auto examples = numbered(257);
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    const auto a = split(examples, seed);
    const auto b = split(examples, seed);
    CHECK(a.train == b.train);
    CHECK(a.valid == b.valid);
    CHECK(a.test == b.test);

    PairSet all;
    std::size_t count = 0;
    for (const auto* part : {&a.train, &a.valid, &a.test}) {
      for (const auto& l : *part) all.emplace(l.issue_id, l.commit_id);
      count += part->size();
    }
    CHECK(count == examples.size());
    CHECK(all == pairs_of(examples));
  }
  CHECK(split(examples, 1).train != split(examples, 2).train);
}

TEST_CASE("grouped split keeps each issue in one partition") {
  std::vector<LinkExample> examples;
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 1 + i % 4; ++j) examples.push_back({"I" + std::to_string(i), "C" + std::to_string(j), j == 0});
  }
  const auto s = split(examples, 3, {.group_by_issue = true});
  CHECK(s.train.size() + s.valid.size() + s.test.size() == examples.size());
  std::set<std::string> seen;
  for (const auto* part : {&s.train, &s.valid, &s.test}) {
    std::set<std::string> ids;
    for (const auto& l : *part) ids.insert(l.issue_id);
    for (const auto& id : ids) CHECK(seen.insert(id).second);
  }
  CHECK(s.train.size() >= examples.size() * 8 / 10);
}

TEST_CASE("restrict_to keeps only referenced artifacts") {
  Corpus c = grid(4, 4);
  c.add_link({"I0", "C0", 1});
  c.add_link({"I1", "C2", 0});
  const std::vector<LinkExample> keep = {{"I1", "C2", 0}};
  const Corpus r = restrict_to(c, keep);
  CHECK(r.issues().size() == 1);
  CHECK(r.commits().size() == 1);
  CHECK(r.links() == keep);
  CHECK(r.commit("C2") == c.commit("C2"));
}

TEST_CASE("shaped synthetic corpus has the requested counts") {
  const Corpus c = make_shaped_corpus({});
  CHECK(c.issues().size() == 239);
  CHECK(c.commits().size() == 115);
  CHECK(c.true_link_count() == 266);
  CHECK(c.false_link_count() == 866);
  std::set<std::string> linked_issues, linked_commits;
  for (const auto& l : c.links()) {
    if (l.label == 1) {
      linked_issues.insert(l.issue_id);
      linked_commits.insert(l.commit_id);
    }
  }
  CHECK(linked_issues.size() == 239);
  CHECK(linked_commits.size() == 115);
}

TEST_CASE("overlap synthetic corpus shares words only along true links") {
  const OverlapCorpusSpec spec{.word_pool = 200, .true_links = 40, .negative_ratio = 2.0, .shared_words = 4, .seed = 4};
  const Corpus c = make_overlap_corpus(spec);
  CHECK(c.true_link_count() == 40);
  CHECK(c.false_link_count() == 80);
  for (const auto& l : c.links()) {
    if (l.label != 1) continue;
    std::istringstream desc(c.issue(l.issue_id).description);
    std::set<std::string> words{std::istream_iterator<std::string>(desc), {}};
    std::istringstream msg(c.commit(l.commit_id).message);
    std::size_t shared = 0;
    for (std::string w; msg >> w;) shared += words.contains(w);
    CHECK(shared >= spec.shared_words);
  }
  const Corpus copy = make_overlap_corpus({.word_pool = 200, .true_links = 10, .seed = 1});
  for (const auto& l : copy.links()) {
    if (l.label == 1) CHECK(copy.issue(l.issue_id).description == copy.commit(l.commit_id).message);
  }
  const Corpus partial = make_overlap_corpus({.word_pool = 200, .true_links = 10, .shared_words = 3, .seed = 1});
  for (const auto& l : partial.links()) {
    if (l.label != 1) continue;
    const auto& d = partial.issue(l.issue_id).description;
    const auto& m = partial.commit(l.commit_id).message;
    const auto third = [](const std::string& s) { return s.substr(0, s.find(' ', s.find(' ', s.find(' ') + 1) + 1)); };
    CHECK(third(d) == third(m));
    CHECK(d != m);
  }
  CHECK_THROWS_AS(make_overlap_corpus({.shared_words = 9}), ConfigError);

  std::stringstream a, b;
  write_corpus(c, a);
  write_corpus(make_overlap_corpus(spec), b);
  CHECK(a.str() == b.str());
}

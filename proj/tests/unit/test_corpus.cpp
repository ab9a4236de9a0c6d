#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "kgprover/corpus.hpp"
#include "kgprover/error.hpp"
#include "test_support.hpp"

using namespace kgp;
using namespace kgp::testing;

namespace {

std::string page_xml(const std::string& title, int ns, const std::string& body, const std::string& extra = {}) {
    return "  <page>\n    <title>" + title + "</title>\n    <ns>" + std::to_string(ns) + "</ns>\n" + extra +
           "    <revision><text xml:space=\"preserve\">" + body + "</text></revision>\n  </page>\n";
}

std::string wrap_dump(const std::string& pages) {
    return "<mediawiki><siteinfo><namespaces>"
           "<namespace key=\"0\" /><namespace key=\"1\">Talk</namespace>"
           "<namespace key=\"100\">Definition</namespace><namespace key=\"102\">Axiom</namespace>"
           "<namespace key=\"104\">Proof</namespace></namespaces></siteinfo>\n" +
           pages + "</mediawiki>\n";
}

Corpus ingest_string(const std::string& xml) {
    std::istringstream in(xml);
    return build_corpus(in);
}

std::string nodes_jsonl(const Corpus& c) {
    std::string out;
    for (const auto& n : c.nodes) out += node_to_jsonl(n);
    return out;
}

std::string edges_csv(const Corpus& c) {
    std::string out = edges_csv_header();
    for (const auto& e : c.edges) out += edge_to_csv(e);
    return out;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("sample dump reproduces the golden corpus") {
    std::ifstream in(fixture("dump/sample.xml"), std::ios::binary);
    REQUIRE(in);
    Corpus c = build_corpus(in);
    CHECK(nodes_jsonl(c) == slurp(fixture("golden/nodes.jsonl")));
    CHECK(edges_csv(c) == slurp(fixture("golden/edges.csv")));
    CHECK(stats_to_json(c.stats) == slurp(fixture("golden/stats.json")));
    CHECK(c.stats.pages_kept == 10);
    CHECK(c.stats.edges_kept == 18);
}

TEST_CASE("write_corpus writes the three files") {
    std::ifstream in(fixture("dump/sample.xml"), std::ios::binary);
    Corpus c = build_corpus(in);
    TempDir dir;
    write_corpus(c, dir.path());
    CHECK(slurp(dir / "nodes.jsonl") == slurp(fixture("golden/nodes.jsonl")));
    CHECK(slurp(dir / "edges.csv") == slurp(fixture("golden/edges.csv")));
    CHECK(slurp(dir / "stats.json") == slurp(fixture("golden/stats.json")));
}

TEST_CASE("node ids are dense in page order") {
    std::ifstream in(fixture("dump/sample.xml"), std::ios::binary);
    Corpus c = build_corpus(in);
    for (std::size_t i = 0; i < c.nodes.size(); ++i) CHECK(c.nodes[i].id == i);
    for (const auto& e : c.edges) {
        CHECK(e.from_id < c.nodes.size());
        CHECK(e.to_id < c.nodes.size());
        CHECK(e.from_id != e.to_id);
    }
}

TEST_CASE("redirects resolve and are not nodes") {
    std::string pages = page_xml("Definition:Group", 100, "Has an [[Definition:Neutral Element]].") +
                        page_xml("Definition:Neutral Element", 100, "",
                                 "    <redirect title=\"Definition:Identity Element\" />\n") +
                        page_xml("Definition:Identity Element", 100, "An element $e$ with $e x = x$.") +
                        page_xml("Definition:Unit", 100, "#REDIRECT [[Definition:Identity Element]]") +
                        page_xml("Definition:Monoid", 100, "See [[Definition:Unit|unit]].");
    Corpus c = ingest_string(wrap_dump(pages));
    CHECK(c.stats.redirects == 2);
    REQUIRE(c.nodes.size() == 3);
    CHECK(c.nodes[1].title == "Definition:Identity Element");
    REQUIRE(c.edges.size() == 2);
    CHECK(c.edges[0] == Edge{0, 1, RelType::RELATED_DEFINITION});
    CHECK(c.edges[1] == Edge{2, 1, RelType::RELATED_DEFINITION});
}

TEST_CASE("dangling, self and duplicate links are dropped and counted") {
    std::string pages = page_xml("Definition:A", 100,
                                 "[[Definition:A]] [[Definition:B]] [[Definition:B|b]] [[Definition:Nowhere]]") +
                        page_xml("Definition:B", 100, "plain") + page_xml("Talk:Definition:A", 1, "[[Definition:B]]");
    Corpus c = ingest_string(wrap_dump(pages));
    CHECK(c.stats.pages_seen == 3);
    CHECK(c.stats.pages_dropped_namespace == 1);
    CHECK(c.stats.edges_dropped_self == 1);
    CHECK(c.stats.edges_dropped_duplicate == 1);
    CHECK(c.stats.edges_dropped_dangling == 1);
    CHECK(c.edges.size() == 1);
}

TEST_CASE("malformed xml throws ParseError") {
    CHECK_THROWS_AS(ingest_string("<mediawiki><page><title>x</title>"), ParseError);
    CHECK_THROWS_AS(ingest_string("<mediawiki><page></mediawiki>"), ParseError);
}

TEST_CASE("untitled pages are skipped with a warning") {
    std::string pages = page_xml("", 0, "orphan text") + page_xml("Some Theorem", 0, "body");
    std::istringstream in(wrap_dump(pages));
    std::vector<std::string> warnings;
    auto raw = parse_dump(in, &warnings);
    CHECK(raw.size() == 1);
    CHECK(warnings.size() == 1);
    Corpus c = ingest_string(wrap_dump(pages));
    CHECK(c.stats.pages_skipped_untitled == 1);
    CHECK(c.stats.pages_seen == 2);
}

TEST_CASE("namespace filter") {
    std::vector<RawPage> pages = {{"Definition:X", "Definition", "", {}},
                                  {"Talk:X", "Talk", "", {}},
                                  {"X", "", "", {}},
                                  {"X/Proof 2", "", "", {}},
                                  {"User:Y", "User", "", {}}};
    FilterCounts counts;
    auto kept = filter_namespaces(pages, &counts);
    CHECK(kept.size() == 3);
    CHECK(counts.dropped_by_namespace["Talk"] == 1);
    CHECK(counts.dropped_by_namespace["User"] == 1);
    CHECK(page_node_type(pages[3]) == NodeType::proof);
    CHECK(page_node_type(pages[2]) == NodeType::theorem);
}

TEST_CASE("cleaning keeps math and links, drops noise") {
    const std::string raw =
        "A <!-- hidden --> '''ring''' is $a \\cdot b$ over [[Definition:Field|a field]]{{stub}}.<ref>x</ref>\n"
        "{{iff}} it holds.\n\n== Sources ==\n* book\n[[Category:Rings]]";
    auto clean = clean_wikitext(raw);
    CHECK(clean.find("hidden") == std::string::npos);
    CHECK(clean.find("$a \\cdot b$") != std::string::npos);
    CHECK(clean.find("[[Definition:Field|a field]]") != std::string::npos);
    CHECK(clean.find("stub") == std::string::npos);
    CHECK(clean.find("Sources") == std::string::npos);
    CHECK(clean.find("Category") == std::string::npos);
    CHECK(clean.find("if and only if it holds") != std::string::npos);
}

TEST_CASE("cleaning is idempotent on generated markup") {
    const std::string atoms[] = {"text ", "{{", "}}", "[[", "]]", "Definition:X", "|", "<!--", "-->",
                                 "$", "$x$", "<ref>", "</ref>", "\n", "== H ==\n", "'''", "{{stub}}",
                                 "{{iff}}", "[[Category:C]]", "<math>y</math>", "=== Sub ===\n"};
    std::mt19937_64 rng(12345);
    for (int round = 0; round < 400; ++round) {
        std::string s;
        const int len = 1 + static_cast<int>(rng() % 30);
        for (int i = 0; i < len; ++i) s += atoms[rng() % std::size(atoms)];
        auto once = clean_wikitext(s);
        CAPTURE(s);
        CHECK(clean_wikitext(once) == once);
    }
}

TEST_CASE("link extraction gives sentence context") {
    auto links = extract_links("First [[Definition:A]] here. Then [[B|bee]] and [[Proof:C#sec]]! $[[D]]$");
    REQUIRE(links.size() == 3);
    CHECK(links[0] == LinkRef{"Definition:A", "First [[Definition:A]] here"});
    CHECK(links[1].target_title == "B");
    CHECK(links[2].target_title == "Proof:C");
    CHECK(links[2].context_window == "Then [[B|bee]] and [[Proof:C#sec]]");
}

TEST_CASE("relationship classification") {
    Node def{0, NodeType::definition, "Definition:G", "G", ""};
    Node thm{1, NodeType::theorem, "T", "T", ""};
    Node prf{2, NodeType::proof, "T/Proof 1", "T/Proof 1", ""};
    CHECK(classify_relationship(def, "Definition:H", "") == RelType::RELATED_DEFINITION);
    CHECK(classify_relationship(thm, "Definition:H", "") == RelType::USES_DEFINITION);
    CHECK(classify_relationship(prf, "Axiom:Choice", "") == RelType::USES_AXIOM);
    CHECK(classify_relationship(prf, "Proof by Contradiction", "") == RelType::PROOF_TECHNIQUE);
    CHECK(classify_relationship(prf, "U/Proof 2", "Similarly to this.") == RelType::SIMILAR_PROOF);
    CHECK(classify_relationship(prf, "U/Proof 2", "Unrelated.") == RelType::LINK);
    CHECK(classify_relationship(prf, "Some Lemma", "") == RelType::PROOF_DEPENDENCY);
    CHECK(classify_relationship(thm, "Some Lemma", "") == RelType::LINK);
}

TEST_CASE("enum names round-trip") {
    for (std::size_t i = 0; i < kRelTypeCount; ++i) {
        auto t = static_cast<RelType>(i);
        CHECK(parse_rel_type(to_string(t)) == t);
    }
    for (int i = 0; i < 5; ++i) {
        auto t = static_cast<NodeType>(i);
        CHECK(parse_node_type(to_string(t)) == t);
    }
    CHECK_FALSE(parse_rel_type("FOO"));
}

}

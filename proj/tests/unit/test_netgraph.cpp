#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "safewatch/error.hpp"
#include "safewatch/netgraph.hpp"
#include "safewatch/synth.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace safewatch;
using fixture::ext;
using fixture::ref;

namespace {

std::vector<std::string> edge_strings(const LabeledGraph& g) {
  std::vector<std::string> out;
  for (const auto& e : g.edges())
    out.push_back(g.nodes()[e.src].id + ">" + g.nodes()[e.dst].id + ":" + to_string(e.relation));
  std::sort(out.begin(), out.end());
  return out;
}

UploaderVerdict verdict(std::string id, Grade g) {
  UploaderVerdict v;
  v.user_id = std::move(id);
  v.n_scored = 1;
  v.grade = g;
  return v;
}

std::vector<UploaderVerdict> oracle_verdicts(const Corpus& c) {
  return detect_unsafe_uploaders(
      c, [](const VideoRecord& v, const FeatureVector&) { return v.label.value_or(Safety::Safe); }, default_lexicon());
}

bool has_line(const std::string& text, const std::string& line) {
  return text.find(line + "\t") != std::string::npos || text.find(line + "\n") != std::string::npos;
}

}  // namespace

TEST_CASE("labeled graph basics") {
  LabeledGraph g;
  const auto a = g.add_node("a", NodeKind::Video, Safety::Safe);
  const auto b = g.add_node("b", NodeKind::Video, Safety::Unsafe);
  CHECK(g.add_edge(a, b, Relation::Related));
  CHECK_FALSE(g.add_edge(a, b, Relation::Related));  // parallel edge collapses
  CHECK(g.add_edge(b, a, Relation::Related));        // directed: distinct
  CHECK(g.add_edge(a, b, Relation::Like));           // another relation stays
  CHECK_FALSE(g.add_edge(a, a, Relation::Like));     // self-loop
  CHECK(g.edge_count() == 3);
  CHECK_THROWS_AS(g.add_node("a", NodeKind::Video, Safety::Safe), Error);

  LabeledGraph u(true);
  u.add_node("a", NodeKind::Commenter, Safety::Safe);
  u.add_node("b", NodeKind::Uploader, Safety::Safe);
  CHECK(u.add_edge(0, 1, Relation::Comment));
  CHECK_FALSE(u.add_edge(1, 0, Relation::Comment));
}

TEST_CASE("video graph") {
  fixture::Builder b;
  b.video("v1", "a");
  b.video("v2", "a", Safety::Unsafe);
  b.video("v3", "b");
  b.video("v4", "b");
  b.related("v1", {ref("v2")});
  b.related("v3", {ext("x"), ref("v2"), ref("v1")});
  const Corpus c = b.build();
  const auto labels = corpus_labels(c);

  SUBCASE("related entries in the corpus become edges") {
    const LabeledGraph g = build_video_graph(c, labels);
    CHECK(edge_strings(g) == std::vector<std::string>{"v1>v2:related", "v3>v1:related", "v3>v2:related"});
    CHECK(g.node_count() == 4);
    CHECK(g.without_isolated().node_count() == 3);
    CHECK(g.nodes()[1].safety == Safety::Unsafe);
  }
  SUBCASE("th limits the list before the membership test") {
    const LabeledGraph g = build_video_graph(c, labels, 2);
    CHECK(edge_strings(g) == std::vector<std::string>{"v1>v2:related", "v3>v2:related"});
  }
  SUBCASE("external entry alone gives no edge") {
    fixture::Builder e;
    e.video("v1", "a");
    e.related("v1", {ext("x")});
    const Corpus ce = e.build();
    CHECK(build_video_graph(ce, corpus_labels(ce)).edge_count() == 0);
  }
  SUBCASE("missing label") {
    fixture::Builder e = b;
    e.videos[0].label.reset();
    try {
      corpus_labels(e.build());
      FAIL("expected an error");
    } catch (const Error& err) {
      CHECK(err.kind() == ErrorKind::Labeling);
    }
  }
  SUBCASE("edge set ignores corpus order") {
    fixture::Builder r = b;
    std::reverse(r.videos.begin(), r.videos.end());
    const Corpus cr = r.build();
    CHECK(edge_strings(build_video_graph(cr, corpus_labels(cr))) == edge_strings(build_video_graph(c, labels)));
  }
}

TEST_CASE("uploader graph") {
  fixture::Builder b;
  b.video("v1", "a");
  b.video("v2", "b");
  b.video("v3", "a");
  b.video("v4", "a");
  b.related("v1", {ref("v2"), ref("v4")});  // v1 -> v4 is a self-loop on a
  b.related("v3", {ref("v2")});
  const Corpus c = b.build();
  const LabeledGraph vg = build_video_graph(c, corpus_labels(c));
  const std::vector<UploaderVerdict> verdicts = {verdict("a", Grade::High), verdict("b", Grade::Safe)};
  const LabeledGraph ug = build_uploader_graph(vg, c, verdicts);
  CHECK(edge_strings(ug) == std::vector<std::string>{"a>b:related"});
  CHECK(ug.nodes()[*ug.find("a")].safety == Safety::Unsafe);
  CHECK(ug.nodes()[*ug.find("b")].safety == Safety::Safe);

  const std::vector<UploaderVerdict> partial = {verdict("a", Grade::Safe)};
  try {
    build_uploader_graph(vg, c, partial);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Labeling);
  }
}

TEST_CASE("commenter graph") {
  fixture::Builder b;
  b.video("v1", "up");
  b.video("v2", "up");
  b.video("w1", "other", Safety::Unsafe);
  for (int i = 0; i < 3; ++i) b.comment("v1", "light", "hi");
  for (int i = 0; i < 4; ++i) b.comment(i % 2 ? "v1" : "v2", "heavy", "hi");
  for (int i = 0; i < 4; ++i) b.comment(i < 3 ? "v1" : "w1", "spread", "hi");
  const Corpus c = b.build();
  const auto verdicts = oracle_verdicts(c);
  const LabeledGraph g = build_commenter_graph(c, verdicts, {"spread"});
  CHECK_FALSE(g.find("light").has_value());
  REQUIRE(g.find("heavy").has_value());
  CHECK(g.undirected());
  CHECK(edge_strings(g) ==
        std::vector<std::string>{"heavy>up:comment", "spread>other:comment", "spread>up:comment"});
  CHECK(g.nodes()[*g.find("spread")].safety == Safety::Unsafe);
  CHECK(g.nodes()[*g.find("other")].safety == Safety::Unsafe);
  const TransitionMatrix t = transitions(g);
  CHECK(t.safe_safe == 1);
  CHECK(t.unsafe_safe == 1);    // unsafe commenter to safe uploader
  CHECK(t.unsafe_unsafe == 1);

  SUBCASE("min_comments of one admits everyone") {
    CHECK(build_commenter_graph(c, verdicts, {}, 1).find("light").has_value());
    CHECK_THROWS_AS(build_commenter_graph(c, verdicts, {}, 0), Error);
  }
}

TEST_CASE("behavior graph") {
  fixture::Builder b;
  b.video("a1", "a");
  b.video("b1", "b");
  b.comment("a1", "c", "hi");
  b.comment("b1", "d", "hi");
  auto& a = b.user("a");
  a.liked_videos = {ref("a1"), ref("b1"), ext("zz")};
  a.playlist_videos = {ref("a1")};
  a.subscribed_users = {ref("b"), ref("c"), ext("chan")};
  auto& c = b.user("c");
  c.liked_videos = {ref("b1")};
  c.subscribed_users = {ref("d"), ext("chan")};
  const Corpus corpus = b.build();
  const std::vector<UploaderVerdict> verdicts = {verdict("a", Grade::Safe), verdict("b", Grade::Extreme)};
  const BehaviorGraph bg =
      build_behavior_graph(corpus, verdicts, {"d"}, {Relation::Like, Relation::Subscribe, Relation::Playlist});
  CHECK(bg.n_uploaders == 2);
  CHECK(bg.n_commenters == 2);
  CHECK(edge_strings(bg.graph) ==
        std::vector<std::string>{"a>b:like", "a>b:subscribe", "a>c:subscribe", "c>b:like", "c>d:subscribe"});

  const auto& like = bg.tallies.at(Relation::Like);
  CHECK(like[0] == RelationTally{3, 1, 1, 0, 1});
  CHECK(like[1] == RelationTally{1, 0, 1, 0, 0});
  const auto& sub = bg.tallies.at(Relation::Subscribe);
  CHECK(sub[0] == RelationTally{3, 0, 1, 1, 1});
  CHECK(sub[1] == RelationTally{2, 0, 0, 1, 1});
  const auto& pl = bg.tallies.at(Relation::Playlist);
  CHECK(pl[0] == RelationTally{1, 1, 0, 0, 0});

  const TransitionMatrix t = transitions(bg.graph);
  CHECK(t.total() == bg.graph.edge_count());
  CHECK(t.safe_unsafe == 4);  // a->b twice, c->b, c->d
  CHECK(t.safe_safe == 1);

  SUBCASE("single relation") {
    const BehaviorGraph only = build_behavior_graph(corpus, verdicts, {}, {Relation::Subscribe});
    CHECK(only.graph.edge_count() == 3);
    CHECK(only.tallies.count(Relation::Like) == 0);
  }
  SUBCASE("non-behavioral relation") {
    CHECK_THROWS_AS(build_behavior_graph(corpus, verdicts, {}, {Relation::Related}), Error);
    CHECK_THROWS_AS(build_behavior_graph(corpus, verdicts, {}, {}), Error);
  }
}

TEST_CASE("behavior edges equal the planted edges") {
  for (std::uint64_t seed : {1, 2, 3}) {
    for (const char* name : {"tiny", "paper-scale"}) {
      const auto gen = generate(preset(name, seed));
      const auto verdicts = oracle_verdicts(gen.corpus);
      const auto flagged = detect_unsafe_commenters(gen.corpus, default_lexicon());
      const BehaviorGraph bg = build_behavior_graph(gen.corpus, verdicts, flagged,
                                                    {Relation::Like, Relation::Subscribe, Relation::Playlist});
      std::vector<PlantedEdge> got;
      for (const auto& e : bg.graph.edges())
        got.push_back({bg.graph.nodes()[e.src].id, bg.graph.nodes()[e.dst].id, e.relation});
      std::sort(got.begin(), got.end());
      CHECK(got == gen.truth.behavior_edges);
      CHECK_FALSE(got.empty());
    }
  }
}

TEST_CASE("transitions") {
  LabeledGraph g;
  g.add_node("s1", NodeKind::Video, Safety::Safe);
  g.add_node("s2", NodeKind::Video, Safety::Safe);
  g.add_node("u1", NodeKind::Video, Safety::Unsafe);
  g.add_node("u2", NodeKind::Video, Safety::Unsafe);
  CHECK(transitions(g) == TransitionMatrix{});
  g.add_edge(0, 1, Relation::Related);
  g.add_edge(0, 2, Relation::Related);
  g.add_edge(2, 3, Relation::Related);
  CHECK(transitions(g) == TransitionMatrix{1, 1, 0, 1});
}

TEST_CASE("transitions match a per-edge recount on random graphs") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    // 30 nodes, p chosen so the expected edge count is about 200.
    const auto rg = oracle::random_graph(30, 200.0 / 435.0, seed, 0.4);
    CHECK(rg.graph.edge_count() == rg.edges.size());
    const TransitionMatrix t = transitions(rg.graph);
    CHECK(t == oracle::transitions(rg.graph));
    CHECK(t.total() == rg.graph.edge_count());
  }
}

TEST_CASE("transitions sum to edge count on every built synthetic graph") {
  const auto gen = generate(preset("paper-scale", 2));
  const auto verdicts = oracle_verdicts(gen.corpus);
  const auto flagged = detect_unsafe_commenters(gen.corpus, default_lexicon());
  const LabeledGraph vg = build_video_graph(gen.corpus, corpus_labels(gen.corpus));
  const std::vector<LabeledGraph> graphs = {
      vg, vg.without_isolated(), build_uploader_graph(vg, gen.corpus, verdicts),
      build_commenter_graph(gen.corpus, verdicts, flagged),
      build_behavior_graph(gen.corpus, verdicts, flagged, {Relation::Like, Relation::Subscribe, Relation::Playlist})
          .graph};
  for (const auto& g : graphs) {
    CHECK(transitions(g).total() == g.edge_count());
    CHECK(transitions(g) == oracle::transitions(g));
  }
  CHECK(vg.edge_count() > 0);
  CHECK(vg.without_isolated().node_count() < vg.node_count());
}

TEST_CASE("report labels") {
  GraphSummary v{262, 630, 31, 0.807, {1, 2, 3, 4}};
  GraphSummary u{92, 114, 8, 0.816, {94, 14, 5, 1}};
  std::ostringstream s;
  write_suggestion_report(s, v, u);
  const std::string text = s.str();
  for (const char* row : {"Number of Nodes", "Number of Edges", "Number of Communities", "Modularity",
                          "Safe to Safe Transition", "Safe to Unsafe Transition", "Unsafe to Safe Transition",
                          "Unsafe to Unsafe Transition"})
    CHECK_MESSAGE(has_line(text, row), row);
  CHECK(text.find("Safe to Unsafe Transition\t2\t14\n") != std::string::npos);

  std::ostringstream c;
  write_commenter_report(c, u);
  for (const char* row : {"Safe Commenter to Safe Uploader", "Unsafe Commenter to Safe Uploader",
                          "Safe Commenter to Unsafe Uploader", "Unsafe Commenter to Unsafe Uploader"})
    CHECK_MESSAGE(has_line(c.str(), row), row);
  CHECK(c.str().find("Unsafe Commenter to Safe Uploader\t5\n") != std::string::npos);

  BehaviorGraph bg;
  bg.tallies[Relation::Like] = {};
  bg.tallies[Relation::Subscribe] = {};
  bg.tallies[Relation::Playlist] = {};
  std::ostringstream b;
  write_behavior_report(b, bg);
  for (const char* row :
       {"Number of Seed Uploaders", "Number of Seed Commenters", "Total Videos liked by Uploaders",
        " - Likes on Videos by Self", " - Likes on Videos by Other Uploaders", " - Likes on Videos by Commenters",
        " - Likes on Videos by Other Users", "Total Videos liked by Commenters",
        " - Likes on Videos by Other Commenters", " - Likes on Videos by Uploaders",
        "Total Subscription by Uploaders", " - Subscription to Other Uploaders", " - Subscription to Commenters",
        " - Subscription to Other Users", "Total Subscription by Commenters", " - Subscription to Other Commenters",
        " - Subscription to Uploaders", "Total Videos in playlist of Uploaders", " - Self Videos",
        " - Videos of Other Uploaders", " - Videos of Commenters", " - Videos of Other Users",
        "Total Videos in playlist of Commenters", " - Videos of Other Commenters", " - Videos of Uploaders"})
    CHECK_MESSAGE(has_line(b.str(), row), row);
}

TEST_CASE("exports") {
  LabeledGraph g;
  g.add_node("a&b", NodeKind::Uploader, Safety::Unsafe);
  g.add_node("c", NodeKind::Commenter, Safety::Safe);
  g.add_edge(1, 0, Relation::Subscribe);
  std::ostringstream el;
  write_edge_list(el, g);
  CHECK(el.str() == "c a&b subscribe\n");
  std::ostringstream xml;
  const std::vector<std::size_t> comm = {0, 0};
  write_graphml(xml, g, comm);
  CHECK(xml.str().find("<node id=\"a&amp;b\">") != std::string::npos);
  CHECK(xml.str().find("<data key=\"community\">0</data>") != std::string::npos);
  CHECK(xml.str().find("edgedefault=\"directed\"") != std::string::npos);
  const std::vector<std::size_t> short_comm = {0};
  std::ostringstream bad;
  CHECK_THROWS_AS(write_graphml(bad, g, short_comm), Error);
}

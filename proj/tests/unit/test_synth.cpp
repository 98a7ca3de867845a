#include <doctest.h>

#include <sstream>
#include <string>

#include "safewatch/error.hpp"
#include "safewatch/synth.hpp"

using namespace safewatch;

namespace {

std::string corpus_bytes(const Corpus& c) {
  std::ostringstream out;
  write_corpus(out, c);
  return out.str();
}

ErrorKind kind_of(const SynthConfig& cfg) {
  try {
    generate(cfg);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("no unsafe uploaders and no comment rate plants nothing") {
  SynthConfig cfg = preset("tiny", 3);
  cfg.unsafe_uploader_fraction = 0.0;
  cfg.unsafe_comment_rate = 0.0;
  const auto gen = generate(cfg);
  for (const auto& u : gen.truth.uploaders) CHECK_FALSE(u.unsafe);
  CHECK(gen.truth.bad_comment_ids.empty());
  CHECK(gen.truth.unsafe_commenters.empty());
  for (const auto& [id, label] : gen.truth.video_labels) CHECK(label == Safety::Safe);
}

TEST_CASE("same seed gives byte-identical corpora") {
  for (const auto& name : preset_names()) {
    if (name == "stress") continue;
    const auto a = generate(preset(name, 11));
    const auto b = generate(preset(name, 11));
    CHECK(corpus_bytes(a.corpus) == corpus_bytes(b.corpus));
    CHECK(a.truth == b.truth);
  }
  CHECK(corpus_bytes(generate(preset("tiny", 1)).corpus) != corpus_bytes(generate(preset("tiny", 2)).corpus));
}

TEST_CASE("paper-scale preset sizes") {
  const auto gen = generate(preset("paper-scale", 1));
  CHECK(gen.corpus.videos().size() == 408);
  CHECK(gen.corpus.uploader_ids().size() == 275);
  CHECK(gen.corpus.commenter_ids().size() == 19099);
  CHECK(gen.truth.uploaders.size() == 275);
  CHECK(gen.truth.video_labels.size() == 408);
}

TEST_CASE("generated corpus passes validation after a reload") {
  const auto gen = generate(preset("tiny", 9));
  std::istringstream in(corpus_bytes(gen.corpus));
  CHECK(parse_corpus(in) == gen.corpus);
}

TEST_CASE("planted labels match the corpus labels") {
  const auto gen = generate(preset("paper-scale", 2));
  for (const auto& v : gen.corpus.videos()) {
    REQUIRE(v.label.has_value());
    CHECK(*v.label == gen.truth.video_labels.at(v.video_id));
  }
  // Every planted unsafe uploader owns at least one unsafe video.
  for (const auto& u : gen.truth.uploaders) {
    if (u.unsafe) CHECK(u.n_unsafe >= 1);
    if (!u.unsafe) CHECK(u.n_unsafe == 0);
  }
}

TEST_CASE("community plant covers count * size users") {
  const auto cfg = preset("tiny", 4);
  const auto gen = generate(cfg);
  CHECK(gen.truth.community.size() == cfg.plant.count * cfg.plant.size);
  for (const auto& e : gen.truth.behavior_edges) {
    CHECK(gen.truth.community.count(e.src) == 1);
    CHECK(gen.truth.community.count(e.dst) == 1);
    CHECK(e.src != e.dst);
  }
}

TEST_CASE("ground truth round-trips") {
  const auto gen = generate(preset("tiny", 5));
  std::stringstream io;
  write_ground_truth(io, gen.truth);
  CHECK(read_ground_truth(io) == gen.truth);
  std::istringstream junk("{\"format\":\"safewatch-corpus\",\"format_version\":1}\n");
  CHECK_THROWS_AS(read_ground_truth(junk), Error);
}

TEST_CASE("infeasible configurations are configuration errors") {
  SynthConfig cfg = preset("tiny", 1);
  SUBCASE("community larger than the user base") {
    cfg.plant = {10, 100, 0.5, 0.01};
    CHECK(kind_of(cfg) == ErrorKind::Config);
  }
  SUBCASE("fraction out of range") {
    cfg.unsafe_uploader_fraction = 1.5;
    CHECK(kind_of(cfg) == ErrorKind::Config);
  }
  SUBCASE("empty range") {
    cfg.comments_per_video = {5, 2};
    CHECK(kind_of(cfg) == ErrorKind::Config);
  }
  SUBCASE("too few videos for the uploaders") {
    cfg.n_videos = cfg.n_uploaders - 1;
    CHECK(kind_of(cfg) == ErrorKind::Config);
  }
  SUBCASE("p_in not above p_out") {
    cfg.plant = {2, 4, 0.1, 0.2};
    CHECK(kind_of(cfg) == ErrorKind::Config);
  }
  SUBCASE("more bad-comment authors than comments") {
    cfg.bad_comments = BadCommentPlan{3, 5};
    CHECK(kind_of(cfg) == ErrorKind::Config);
  }
  CHECK_THROWS_AS(preset("nope"), Error);
}

TEST_CASE("planted partition graph") {
  const PlantedGraph pg = planted_partition_graph({4, 10, 0.5, 0.02}, 6, 0.3);
  CHECK(pg.graph.node_count() == 40);
  CHECK(pg.membership.size() == 40);
  CHECK(pg.graph.nodes()[13].id == "b1-n3");
  std::size_t inside = 0;
  for (const auto& e : pg.graph.edges()) inside += pg.membership[e.src] == pg.membership[e.dst];
  CHECK(inside * 2 > pg.graph.edge_count());
  for (std::size_t b = 0; b < 4; ++b) {
    for (std::size_t i = 0; i < 10; ++i) {
      const bool unsafe = pg.graph.nodes()[b * 10 + i].safety == Safety::Unsafe;
      CHECK(unsafe == (i < pg.unsafe_per_block[b]));
    }
  }
  const PlantedGraph again = planted_partition_graph({4, 10, 0.5, 0.02}, 6, 0.3);
  CHECK(again.graph.edges() == pg.graph.edges());
}

TEST_CASE("stress preset reaches the advertised scale") {
  const auto cfg = preset("stress", 1);
  CHECK(cfg.n_uploaders + cfg.n_commenters == 10000);
  const auto gen = generate(cfg);
  CHECK(gen.truth.behavior_edges.size() >= 90000);
}

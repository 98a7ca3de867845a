#include "safewatch/cli.hpp"

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "safewatch/community.hpp"
#include "safewatch/corpus.hpp"
#include "safewatch/detect.hpp"
#include "safewatch/features.hpp"
#include "safewatch/learn.hpp"
#include "safewatch/netgraph.hpp"
#include "safewatch/rng.hpp"
#include "safewatch/synth.hpp"

namespace safewatch::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::Integrity:
    case ErrorKind::Schema:
    case ErrorKind::Labeling:
    case ErrorKind::Extraction:
    case ErrorKind::Coverage:
    case ErrorKind::Stratification:
      return kDataIntegrity;
    case ErrorKind::Config:
    case ErrorKind::Parameter:
      return kNumeric;
    case ErrorKind::Internal:
      return kInternal;
  }
  return kInternal;
}

namespace {

// Seed streams fanned out of --seed.
enum SeedStream : std::uint64_t { kSeedLearn = 1, kSeedLouvain = 2 };

const std::vector<std::string> kGraphKinds = {"video", "uploader", "commenter", "behavior"};

struct RunConfig {
  std::string command;
  std::string corpus;
  std::string lexicon;
  std::string model;
  std::string matrix;
  std::string preset;
  std::string out_dir;
  std::uint64_t seed = 1;
  GradeThresholds thresholds;
  std::size_t min_comments = kDefaultMinComments;
  std::size_t th = kDefaultRelatedTh;
  std::size_t video_cap = kDefaultVideoCap;
  std::size_t comment_cap = kDefaultCommentCap;
  std::string eval_view;  // empty: all four views
  std::string view = "all";
  std::string classifier = "forest";
  LearnParams learn;
  std::string kind = "video";
  bool drop_isolated = false;
  std::optional<double> signal_video;
  std::optional<double> signal_user;
  std::optional<double> signal_comment;
  std::optional<double> unsafe_fraction;
  std::optional<double> comment_rate;
};

[[noreturn]] void param_error(const std::string& msg) { throw Error(ErrorKind::Parameter, "cli", msg); }

void validate(const RunConfig& c) {
  safewatch::validate(c.thresholds);
  if (c.th == 0) param_error("--th must be at least 1");
  if (c.video_cap == 0) param_error("--video-cap must be at least 1");
  if (c.comment_cap == 0) param_error("--comment-cap must be at least 1");
  if (c.min_comments == 0) param_error("--min-comments must be at least 1");
  if (!(c.learn.train_fraction > 0.0 && c.learn.train_fraction < 1.0))
    param_error("--train-fraction must lie strictly between 0 and 1");
  if (c.learn.forest.n_trees == 0) param_error("--trees must be at least 1");
  if (c.learn.forest.features_per_split == 0) param_error("--mtry must be at least 1");
  if (c.learn.knn_k == 0 || c.learn.knn_k % 2 == 0) param_error("--k must be a positive odd number");
  if (c.learn.tree.min_leaf == 0 || c.learn.forest.min_leaf == 0) param_error("--min-leaf must be at least 1");
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class Context {
 public:
  Context(RunConfig cfg, std::ostream& out) : cfg_(std::move(cfg)), out_(out) {}

  const RunConfig& cfg() const { return cfg_; }
  std::ostream& out() { return out_; }

  // Writes through a sibling temp file and renames it into place.
  void write(const std::string& name, const std::string& content) {
    const fs::path dir(cfg_.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Parameter, "cli", "cannot create output directory '" + dir.string() + "': " + ec.message());
    const fs::path final_path = dir / name;
    const fs::path tmp = dir / ("." + name + ".tmp");
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw Error(ErrorKind::Internal, "cli", "cannot open '" + tmp.string() + "' for writing");
      f << content;
      f.flush();
      if (!f) throw Error(ErrorKind::Internal, "cli", "write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, final_path, ec);
    if (ec) {
      fs::remove(tmp);
      throw Error(ErrorKind::Internal, "cli", "cannot move '" + tmp.string() + "' into place: " + ec.message());
    }
    artifacts_[name] = content;
    out_ << "wrote " << final_path.string() << '\n';
  }

  template <typename F>
  void emit(const std::string& name, F&& fill) {
    std::ostringstream os;
    fill(os);
    write(name, os.str());
  }

  const std::map<std::string, std::string>& artifacts() const { return artifacts_; }

  const Lexicon& lexicon() {
    if (cfg_.lexicon.empty()) return default_lexicon();
    if (!lexicon_) lexicon_ = load_lexicon(cfg_.lexicon);
    return *lexicon_;
  }

  const Corpus& corpus() {
    if (!corpus_) {
      if (cfg_.corpus.empty()) throw Error(ErrorKind::Parameter, "cli", "--corpus is required");
      corpus_ = load_corpus(cfg_.corpus);
    }
    return *corpus_;
  }
  void set_corpus(Corpus c) { corpus_ = std::move(c); }

  const std::optional<Model>& model() {
    if (!model_ && !cfg_.model.empty()) {
      std::ifstream f(cfg_.model, std::ios::binary);
      if (!f) throw Error(ErrorKind::Parse, "cli", "cannot open model file '" + cfg_.model + "'");
      model_ = load_model(f, cfg_.model);
    }
    return model_;
  }
  void set_model(Model m) { model_ = std::move(m); }

 private:
  RunConfig cfg_;
  std::ostream& out_;
  std::map<std::string, std::string> artifacts_;
  std::optional<Lexicon> lexicon_;
  std::optional<Corpus> corpus_;
  std::optional<Model> model_;
};

FeatureView view_of(const std::string& name) {
  auto v = parse_feature_view(name);
  if (!v) param_error("unknown feature view '" + name + "' (expected video, user, comment or all)");
  return *v;
}

// ---- stages ---------------------------------------------------------------

SynthOutput do_synth(Context& ctx) {
  const auto& c = ctx.cfg();
  SynthConfig sc = preset(c.preset.empty() ? "tiny" : c.preset, c.seed);
  if (c.signal_video) sc.signal.video = *c.signal_video;
  if (c.signal_user) sc.signal.user = *c.signal_user;
  if (c.signal_comment) sc.signal.comment = *c.signal_comment;
  if (c.unsafe_fraction) sc.unsafe_uploader_fraction = *c.unsafe_fraction;
  if (c.comment_rate) {
    sc.unsafe_comment_rate = *c.comment_rate;
    sc.bad_comments.reset();
  }
  SynthOutput so = generate(sc);
  ctx.emit("corpus.jsonl", [&](std::ostream& os) { write_corpus(os, so.corpus); });
  ctx.emit("truth.jsonl", [&](std::ostream& os) { write_ground_truth(os, so.truth); });
  return so;
}

std::vector<FeatureRow> load_rows(Context& ctx) {
  if (!ctx.cfg().matrix.empty()) {
    std::ifstream f(ctx.cfg().matrix, std::ios::binary);
    if (!f) throw Error(ErrorKind::Parse, "cli", "cannot open feature matrix '" + ctx.cfg().matrix + "'");
    return read_feature_matrix(f, ctx.cfg().matrix);
  }
  return extract_corpus(ctx.corpus(), ctx.lexicon(), ctx.cfg().comment_cap);
}

std::vector<FeatureRow> do_extract(Context& ctx) {
  auto rows = extract_corpus(ctx.corpus(), ctx.lexicon(), ctx.cfg().comment_cap);
  ctx.emit("features.csv", [&](std::ostream& os) { write_feature_matrix(os, rows); });
  return rows;
}

void write_report_rows(std::ostream& os, const std::vector<GridRow>& rows) { write_eval_grid(os, rows); }

Model do_train(Context& ctx, const std::vector<FeatureRow>& rows) {
  const auto& c = ctx.cfg();
  auto kind = parse_classifier(c.classifier);
  if (!kind) param_error("unknown classifier '" + c.classifier + "' (expected forest, knn or tree)");
  const Dataset data = make_dataset(rows, view_of(c.view));
  const std::uint64_t learn_seed = derive_seed(c.seed, kSeedLearn);
  // Same split and model seeds as the evaluation grid.
  auto [train, test] = split(data, c.learn.train_fraction, derive_seed(learn_seed, 0));
  Model m = train_model(*kind, train, c.learn, derive_seed(learn_seed, 1));
  const EvalReport r = evaluate(m, test);
  ctx.emit("model.json", [&](std::ostream& os) { save_model(os, m); });
  ctx.emit("train_eval.tsv", [&](std::ostream& os) {
    write_report_rows(os, {GridRow{*kind, view_of(c.view), r}});
  });
  return m;
}

std::vector<GridRow> do_eval(Context& ctx, const std::vector<FeatureRow>& rows) {
  const auto& c = ctx.cfg();
  std::vector<FeatureView> views;
  if (!c.eval_view.empty()) views.push_back(view_of(c.eval_view));
  const Dataset data = make_dataset(rows, FeatureView::All);
  auto grid = compare_feature_views(data, derive_seed(c.seed, kSeedLearn), c.learn, views);
  ctx.emit("eval_grid.tsv", [&](std::ostream& os) { write_eval_grid(os, grid); });
  return grid;
}

// Video labels, uploader verdicts and flagged commenters: from the model when
// one is given, from the corpus labels otherwise.
struct Labels {
  std::map<std::string, Safety> videos;
  std::vector<UploaderVerdict> verdicts;
  std::set<std::string> unsafe_commenters;
};

DetectOptions detect_options(const RunConfig& c) {
  DetectOptions o;
  o.video_cap = c.video_cap;
  o.comment_cap = c.comment_cap;
  o.thresholds = c.thresholds;
  return o;
}

Labels label_corpus(Context& ctx) {
  const Corpus& corpus = ctx.corpus();
  const Lexicon& lex = ctx.lexicon();
  const DetectOptions opts = detect_options(ctx.cfg());
  Labels l;
  if (const auto& m = ctx.model()) {
    if (model_dim(*m) != kFeatureCount)
      throw Error(ErrorKind::Schema, "cli", "model expects " + std::to_string(model_dim(*m)) + " features, not " +
                                                std::to_string(kFeatureCount));
    for (const auto& v : corpus.videos())
      l.videos[v.video_id] = predict(*m, extract(v, corpus, lex, opts.comment_cap).values);
    l.verdicts = detect_unsafe_uploaders(corpus, *m, lex, opts);
  } else {
    l.videos = corpus_labels(corpus);
    const auto& labels = l.videos;
    l.verdicts = detect_unsafe_uploaders(
        corpus, [&](const VideoRecord& v, const FeatureVector&) { return labels.at(v.video_id); }, lex, opts);
  }
  l.unsafe_commenters = detect_unsafe_commenters(corpus, lex);
  return l;
}

void do_detect(Context& ctx, const Labels& l) {
  ctx.emit("verdicts.tsv", [&](std::ostream& os) { write_verdicts(os, l.verdicts); });
  ctx.emit("unsafe_commenters.txt", [&](std::ostream& os) {
    for (const auto& id : l.unsafe_commenters) os << id << '\n';
  });
  const auto curves = characterize(ctx.corpus(), l.verdicts);
  ctx.emit("ecdf.tsv", [&](std::ostream& os) {
    for (const auto& [metric, pair] : curves) {
      write_ecdf(os, metric, "safe", pair.safe);
      write_ecdf(os, metric, "unsafe", pair.unsafe);
    }
  });
  ctx.emit("ratio_ecdf.tsv", [&](std::ostream& os) { write_ecdf(os, "indecent_ratio", "all", ratio_distribution(l.verdicts)); });
}

LabeledGraph build_graph(Context& ctx, const Labels& l, const std::string& kind) {
  const Corpus& corpus = ctx.corpus();
  const auto& c = ctx.cfg();
  LabeledGraph g;
  if (kind == "video") {
    g = build_video_graph(corpus, l.videos, c.th);
  } else if (kind == "uploader") {
    g = build_uploader_graph(build_video_graph(corpus, l.videos, c.th), corpus, l.verdicts);
  } else if (kind == "commenter") {
    g = build_commenter_graph(corpus, l.verdicts, l.unsafe_commenters, c.min_comments);
  } else if (kind == "behavior") {
    g = build_behavior_graph(corpus, l.verdicts, l.unsafe_commenters,
                             {Relation::Like, Relation::Subscribe, Relation::Playlist})
            .graph;
  } else {
    param_error("unknown graph kind '" + kind + "' (expected video, uploader, commenter or behavior)");
  }
  return c.drop_isolated ? g.without_isolated() : g;
}

void write_transitions(std::ostream& os, const TransitionMatrix& t) {
  os << "transition\tcount\n";
  os << "Safe to Safe\t" << t.safe_safe << '\n';
  os << "Safe to Unsafe\t" << t.safe_unsafe << '\n';
  os << "Unsafe to Safe\t" << t.unsafe_safe << '\n';
  os << "Unsafe to Unsafe\t" << t.unsafe_unsafe << '\n';
  os << "Total\t" << t.total() << '\n';
}

void do_graph(Context& ctx, const LabeledGraph& g, const std::string& kind) {
  ctx.emit("graph_" + kind + ".edges", [&](std::ostream& os) { write_edge_list(os, g); });
  ctx.emit("graph_" + kind + ".graphml", [&](std::ostream& os) { write_graphml(os, g); });
  ctx.emit("transitions_" + kind + ".tsv", [&](std::ostream& os) { write_transitions(os, transitions(g)); });
}

std::uint64_t louvain_seed(const RunConfig& c, const std::string& kind) {
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < kGraphKinds.size(); ++i) {
    if (kGraphKinds[i] == kind) k = i;
  }
  return derive_seed(derive_seed(c.seed, kSeedLouvain), k);
}

GraphSummary do_communities(Context& ctx, const LabeledGraph& g, const std::string& kind) {
  GraphSummary s;
  s.nodes = g.node_count();
  s.edges = g.edge_count();
  s.transitions = transitions(g);
  if (g.node_count() == 0) return s;
  const Partition p = louvain(g, louvain_seed(ctx.cfg(), kind));
  s.communities = p.communities;
  s.modularity = p.modularity;
  const auto census = community_composition(g, p);
  ctx.emit("partition_" + kind + ".tsv", [&](std::ostream& os) { write_partition(os, g, p); });
  ctx.emit("composition_" + kind + ".tsv", [&](std::ostream& os) { write_composition(os, census); });
  ctx.emit("communities_" + kind + ".graphml", [&](std::ostream& os) { write_graphml(os, g, p.assignment); });
  return s;
}

GraphSummary summarize(Context& ctx, const LabeledGraph& g, const std::string& kind) {
  GraphSummary s;
  s.nodes = g.node_count();
  s.edges = g.edge_count();
  s.transitions = transitions(g);
  if (g.node_count() > 0) {
    const Partition p = louvain(g, louvain_seed(ctx.cfg(), kind));
    s.communities = p.communities;
    s.modularity = p.modularity;
  }
  return s;
}

void do_report(Context& ctx, const Labels& l, const std::map<std::string, GraphSummary>& done) {
  auto get = [&](const std::string& kind) {
    if (auto it = done.find(kind); it != done.end()) return it->second;
    return summarize(ctx, build_graph(ctx, l, kind), kind);
  };
  const GraphSummary video = get("video");
  const GraphSummary uploader = get("uploader");
  const GraphSummary commenter = get("commenter");
  ctx.emit("report_suggestion.tsv", [&](std::ostream& os) { write_suggestion_report(os, video, uploader); });
  ctx.emit("report_commenter.tsv", [&](std::ostream& os) { write_commenter_report(os, commenter); });
  const BehaviorGraph bg = build_behavior_graph(ctx.corpus(), l.verdicts, l.unsafe_commenters,
                                                {Relation::Like, Relation::Subscribe, Relation::Playlist});
  ctx.emit("report_behavior.tsv", [&](std::ostream& os) { write_behavior_report(os, bg); });
}

json config_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  if (!c.preset.empty()) j["preset"] = c.preset;
  if (!c.corpus.empty()) j["corpus"] = c.corpus;
  if (!c.lexicon.empty()) j["lexicon"] = c.lexicon;
  j["thresholds"] = {{"moderate", c.thresholds.moderate}, {"high", c.thresholds.high}, {"extreme", c.thresholds.extreme}};
  j["min_comments"] = c.min_comments;
  j["th"] = c.th;
  j["video_cap"] = c.video_cap;
  j["comment_cap"] = c.comment_cap;
  j["drop_isolated"] = c.drop_isolated;
  j["classifier"] = c.classifier;
  j["view"] = c.view;
  j["eval_view"] = c.eval_view.empty() ? "all-views" : c.eval_view;
  j["learn"] = {{"train_fraction", c.learn.train_fraction},
                {"trees", c.learn.forest.n_trees},
                {"mtry", c.learn.forest.features_per_split},
                {"max_depth", c.learn.forest.max_depth},
                {"min_leaf", c.learn.forest.min_leaf},
                {"k", c.learn.knn_k}};
  auto opt = [&](const char* key, const std::optional<double>& v) {
    if (v) j["synth_overrides"][key] = *v;
  };
  opt("signal_video", c.signal_video);
  opt("signal_user", c.signal_user);
  opt("signal_comment", c.signal_comment);
  opt("unsafe_fraction", c.unsafe_fraction);
  opt("comment_rate", c.comment_rate);
  const std::uint64_t learn_seed = derive_seed(c.seed, kSeedLearn);
  j["seeds"] = {{"synth", c.seed},
                {"split", derive_seed(learn_seed, 0)},
                {"train", derive_seed(learn_seed, 1)}};
  for (const auto& k : kGraphKinds) j["seeds"]["louvain_" + k] = louvain_seed(c, k);
  return j;
}

void do_pipeline(Context& ctx, const std::vector<std::string>& args) {
  const auto& c = ctx.cfg();
  if (c.preset.empty() == c.corpus.empty()) param_error("pipeline needs exactly one of --preset or --corpus");
  if (!c.preset.empty()) ctx.set_corpus(do_synth(ctx).corpus);
  const auto rows = do_extract(ctx);
  ctx.set_model(do_train(ctx, rows));
  do_eval(ctx, rows);
  const Labels l = label_corpus(ctx);
  do_detect(ctx, l);
  std::map<std::string, GraphSummary> summaries;
  for (const auto& kind : kGraphKinds) {
    const LabeledGraph g = build_graph(ctx, l, kind);
    do_graph(ctx, g, kind);
    summaries[kind] = do_communities(ctx, g, kind);
  }
  do_report(ctx, l, summaries);

  json m;
  m["format"] = "safewatch-manifest";
  m["format_version"] = 1;
  m["command"] = "pipeline";
  // Arguments minus the output directory, which does not affect any artifact.
  json argv = json::array();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    argv.push_back(args[i]);
  }
  m["argv"] = argv;
  m["config"] = config_json(c);
  json arts = json::array();
  for (const auto& [name, content] : ctx.artifacts())
    arts.push_back({{"name", name}, {"bytes", content.size()}, {"fnv1a64", hex64(fnv1a(content))}});
  m["artifacts"] = arts;
  ctx.write("manifest.json", m.dump(2) + "\n");
}

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--out", c.out_dir, "Output directory (default: $SAFEWATCH_OUT, else ./safewatch-out)");
  sub->add_option("--seed", c.seed, "Master seed");
}
void add_corpus(CLI::App* sub, RunConfig& c, bool required) {
  auto* o = sub->add_option("--corpus", c.corpus, "Corpus file (JSON Lines)");
  if (required) o->required();
  sub->add_option("--lexicon", c.lexicon, "Lexicon file (default: built-in word list)");
  sub->add_option("--comment-cap", c.comment_cap, "Comments per video used for features");
}
void add_learn(CLI::App* sub, RunConfig& c) {
  sub->add_option("--train-fraction", c.learn.train_fraction, "Stratified training share");
  sub->add_option("--trees", c.learn.forest.n_trees, "Random forest size");
  sub->add_option("--mtry", c.learn.forest.features_per_split, "Candidate features per forest split");
  sub->add_option("--max-depth", c.learn.forest.max_depth, "Depth limit for trees (0 = none)");
  sub->add_option("--min-leaf", c.learn.forest.min_leaf, "Minimum rows per leaf");
  sub->add_option("--k", c.learn.knn_k, "Neighbours for kNN (odd)");
}
void add_detect(CLI::App* sub, RunConfig& c) {
  sub->add_option("--model", c.model, "Model file; corpus labels are used when omitted");
  sub->add_option("--moderate", c.thresholds.moderate, "Ratio where Moderate starts");
  sub->add_option("--high", c.thresholds.high, "Ratio where High starts");
  sub->add_option("--extreme", c.thresholds.extreme, "Ratio where Extreme starts");
  sub->add_option("--video-cap", c.video_cap, "Videos scored per uploader");
}
void add_graph(CLI::App* sub, RunConfig& c, bool kind) {
  if (kind)
    sub->add_option("--kind", c.kind, "video, uploader, commenter or behavior")
        ->check(CLI::IsMember(kGraphKinds));
  sub->add_option("--th", c.th, "Related entries followed per video");
  sub->add_option("--min-comments", c.min_comments, "Comments needed to enter the commenter graph");
  sub->add_flag("--drop-isolated", c.drop_isolated, "Remove zero-degree nodes");
}
void add_synth(CLI::App* sub, RunConfig& c) {
  sub->add_option("--preset", c.preset, "tiny, paper-scale or stress")->check(CLI::IsMember(preset_names()));
  sub->add_option("--signal-video", c.signal_video, "Video feature shift");
  sub->add_option("--signal-user", c.signal_user, "User feature shift");
  sub->add_option("--signal-comment", c.signal_comment, "Comment feature shift");
  sub->add_option("--unsafe-fraction", c.unsafe_fraction, "Share of unsafe uploaders");
  sub->add_option("--comment-rate", c.comment_rate, "Bad-word rate for comments (replaces an exact plan)");
}

int dispatch(RunConfig& c, const std::vector<std::string>& args, std::ostream& out) {
  if (c.out_dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    c.out_dir = env && *env ? env : "safewatch-out";
  }
  validate(c);
  Context ctx(c, out);
  const std::string& cmd = c.command;
  if (cmd == "synth") {
    do_synth(ctx);
  } else if (cmd == "extract") {
    do_extract(ctx);
  } else if (cmd == "train") {
    do_train(ctx, load_rows(ctx));
  } else if (cmd == "eval") {
    const auto grid = do_eval(ctx, load_rows(ctx));
    write_eval_grid(out, grid);
  } else if (cmd == "detect") {
    do_detect(ctx, label_corpus(ctx));
  } else if (cmd == "graph") {
    const Labels l = label_corpus(ctx);
    const LabeledGraph g = build_graph(ctx, l, c.kind);
    do_graph(ctx, g, c.kind);
    write_transitions(out, transitions(g));
  } else if (cmd == "communities") {
    const Labels l = label_corpus(ctx);
    const GraphSummary s = do_communities(ctx, build_graph(ctx, l, c.kind), c.kind);
    out << "communities\t" << s.communities << "\nmodularity\t" << format_double(s.modularity) << '\n';
  } else if (cmd == "report") {
    do_report(ctx, label_corpus(ctx), {});
  } else if (cmd == "pipeline") {
    do_pipeline(ctx, args);
  }
  return kOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Unsafe content and promoter analysis for video-sharing corpora", "safewatch"};
  app.require_subcommand(1);
  app.fallthrough(false);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
  add_common(synth, c);
  add_synth(synth, c);

  auto* extract = app.add_subcommand("extract", "Write the 34-feature matrix of a corpus");
  add_common(extract, c);
  add_corpus(extract, c, true);

  auto* train = app.add_subcommand("train", "Train one classifier on a stratified split");
  add_common(train, c);
  add_corpus(train, c, false);
  train->add_option("--matrix", c.matrix, "Feature matrix instead of a corpus");
  train->add_option("--classifier", c.classifier, "forest, knn or tree");
  train->add_option("--view", c.view, "video, user, comment or all");
  add_learn(train, c);

  auto* eval = app.add_subcommand("eval", "Classifier by feature-view evaluation grid");
  add_common(eval, c);
  add_corpus(eval, c, false);
  eval->add_option("--matrix", c.matrix, "Feature matrix instead of a corpus");
  eval->add_option("--features", c.eval_view, "Restrict the grid to one view: video, user, comment or all");
  add_learn(eval, c);

  auto* detect = app.add_subcommand("detect", "Grade uploaders and flag commenters");
  add_common(detect, c);
  add_corpus(detect, c, true);
  add_detect(detect, c);

  auto* graph = app.add_subcommand("graph", "Build one graph and its transition matrix");
  add_common(graph, c);
  add_corpus(graph, c, true);
  add_detect(graph, c);
  add_graph(graph, c, true);

  auto* comm = app.add_subcommand("communities", "Louvain communities of one graph");
  add_common(comm, c);
  add_corpus(comm, c, true);
  add_detect(comm, c);
  add_graph(comm, c, true);

  auto* report = app.add_subcommand("report", "Transition and behavior reports");
  add_common(report, c);
  add_corpus(report, c, true);
  add_detect(report, c);
  add_graph(report, c, false);

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write a manifest");
  add_common(pipeline, c);
  add_corpus(pipeline, c, false);
  add_synth(pipeline, c);
  add_detect(pipeline, c);
  add_graph(pipeline, c, false);
  add_learn(pipeline, c);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    err << "safewatch: error exit=" << kUsage << " kind=usage module=cli: " << msg << '\n';
    return kUsage;
  }
  for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  if (c.command == "synth" && c.preset.empty()) c.preset = "tiny";

  try {
    return dispatch(c, std::vector<std::string>(args.begin(), args.end()), out);
  } catch (const Error& e) {
    std::string msg = e.what();
    for (auto& ch : msg) {
      if (ch == '\n' || ch == '\r') ch = ' ';
    }
    const int code = exit_code(e.kind());
    err << "safewatch: error exit=" << code << " kind=" << to_string(e.kind()) << " module=" << e.module() << ": "
        << msg << '\n';
    return code;
  } catch (const std::exception& e) {
    err << "safewatch: error exit=" << kInternal << " kind=internal module=cli: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace safewatch::cli

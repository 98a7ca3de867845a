#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "safewatch/cli.hpp"
#include "safewatch/community.hpp"
#include "safewatch/corpus.hpp"
#include "safewatch/detect.hpp"
#include "safewatch/error.hpp"
#include "safewatch/features.hpp"
#include "safewatch/learn.hpp"
#include "safewatch/netgraph.hpp"
#include "safewatch/synth.hpp"

namespace py = pybind11;
using namespace safewatch;

namespace {

std::optional<std::string> label_str(const std::optional<Safety>& s) {
  if (!s) return std::nullopt;
  return std::string(to_string(*s));
}

Safety safety_of(const std::string& text) {
  if (auto s = parse_safety(text)) return *s;
  throw Error(ErrorKind::Parameter, "python", "expected 'safe' or 'unsafe', got '" + text + "'");
}

template <typename E>
E enum_of(const std::string& text, std::optional<E> (*parse)(std::string_view) noexcept, const char* what) {
  if (auto v = parse(text)) return *v;
  throw Error(ErrorKind::Parameter, "python", std::string("unknown ") + what + " '" + text + "'");
}

// Rows of a 2-D float array into a Dataset over every column.
Dataset dataset_of(const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                   const std::vector<std::string>& y) {
  if (x.ndim() != 2) throw Error(ErrorKind::Parameter, "python", "X must be 2-D");
  const auto n = static_cast<std::size_t>(x.shape(0));
  const auto dim = static_cast<std::size_t>(x.shape(1));
  if (y.size() != n) throw Error(ErrorKind::Parameter, "python", "X and y differ in length");
  Dataset d;
  d.dim = dim;
  for (std::size_t c = 0; c < dim; ++c) d.features.push_back(c);
  const double* p = x.data();
  for (std::size_t i = 0; i < n; ++i) d.add_row({p + i * dim, dim}, safety_of(y[i]));
  return d;
}

std::string corpus_text(const Corpus& c) {
  std::ostringstream out;
  write_corpus(out, c);
  return out.str();
}

Safety corpus_label(const VideoRecord& v, const FeatureVector&) {
  if (!v.label) throw Error(ErrorKind::Labeling, "detect", "video " + v.video_id + " has no label");
  return *v.label;
}

// Opaque holder; binding the variant directly would make pybind convert it
// to its (unregistered) alternatives.
struct PyModel {
  Model model;
};

py::dict transitions_dict(const TransitionMatrix& t) {
  py::dict d;
  d["safe_safe"] = t.safe_safe;
  d["safe_unsafe"] = t.safe_unsafe;
  d["unsafe_safe"] = t.unsafe_safe;
  d["unsafe_unsafe"] = t.unsafe_unsafe;
  d["total"] = t.total();
  return d;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["tp"] = r.tp;
  d["fp"] = r.fp;
  d["fn"] = r.fn;
  d["tn"] = r.tn;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["accuracy"] = r.accuracy;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Unsafe-content detection and social graph analysis";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      inst.attr("kind") = to_string(e.kind());
      inst.attr("module") = e.module();
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  // corpus
  py::class_<VideoRecord>(m, "Video")
      .def_readonly("video_id", &VideoRecord::video_id)
      .def_readonly("uploader_id", &VideoRecord::uploader_id)
      .def_readonly("title", &VideoRecord::title)
      .def_readonly("view_count", &VideoRecord::view_count)
      .def_readonly("comment_count", &VideoRecord::comment_count)
      .def_property_readonly("label", [](const VideoRecord& v) { return label_str(v.label); })
      .def("__repr__", [](const VideoRecord& v) { return "<Video " + v.video_id + ">"; });

  py::class_<UserRecord>(m, "User")
      .def_readonly("user_id", &UserRecord::user_id)
      .def_readonly("is_uploader", &UserRecord::is_uploader)
      .def_readonly("is_commenter", &UserRecord::is_commenter)
      .def_readonly("subscriber_count", &UserRecord::subscriber_count)
      .def_readonly("total_views", &UserRecord::total_views)
      .def("__repr__", [](const UserRecord& u) { return "<User " + u.user_id + ">"; });

  py::class_<CommentRecord>(m, "Comment")
      .def_readonly("comment_id", &CommentRecord::comment_id)
      .def_readonly("video_id", &CommentRecord::video_id)
      .def_readonly("author_id", &CommentRecord::author_id)
      .def_readonly("text", &CommentRecord::text);

  py::class_<Corpus>(m, "Corpus")
      .def_property_readonly("videos", &Corpus::videos, py::return_value_policy::reference_internal)
      .def_property_readonly("users", &Corpus::users, py::return_value_policy::reference_internal)
      .def_property_readonly("comments", &Corpus::comments, py::return_value_policy::reference_internal)
      .def("uploader_ids", &Corpus::uploader_ids)
      .def("commenter_ids", &Corpus::commenter_ids)
      .def("to_jsonl", &corpus_text)
      .def("save", [](const Corpus& c, const std::filesystem::path& path) { save_corpus(path, c); })
      .def("__eq__", [](const Corpus& a, const Corpus& b) { return a == b; });

  m.def("load_corpus", &load_corpus, py::arg("path"));
  m.def(
      "parse_corpus",
      [](const std::string& text) {
        std::istringstream in(text);
        return parse_corpus(in);
      },
      py::arg("text"));

  // synth
  py::class_<SignalStrength>(m, "SignalStrength")
      .def(py::init<>())
      .def(py::init([](double v, double u, double c) { return SignalStrength{v, u, c}; }), py::arg("video"),
           py::arg("user"), py::arg("comment"))
      .def_readwrite("video", &SignalStrength::video)
      .def_readwrite("user", &SignalStrength::user)
      .def_readwrite("comment", &SignalStrength::comment);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("seed", &SynthConfig::seed)
      .def_readwrite("n_uploaders", &SynthConfig::n_uploaders)
      .def_readwrite("n_commenters", &SynthConfig::n_commenters)
      .def_readwrite("n_videos", &SynthConfig::n_videos)
      .def_readwrite("unsafe_uploader_fraction", &SynthConfig::unsafe_uploader_fraction)
      .def_readwrite("unsafe_video_rate", &SynthConfig::unsafe_video_rate)
      .def_readwrite("unsafe_comment_rate", &SynthConfig::unsafe_comment_rate)
      .def_readwrite("signal", &SynthConfig::signal)
      .def_readwrite("unsafe_less_popular", &SynthConfig::unsafe_less_popular)
      .def("validate", &SynthConfig::validate);

  py::class_<PlantedUploader>(m, "PlantedUploader")
      .def_readonly("user_id", &PlantedUploader::user_id)
      .def_readonly("unsafe", &PlantedUploader::unsafe)
      .def_readonly("ratio", &PlantedUploader::ratio)
      .def_property_readonly("grade", [](const PlantedUploader& u) { return to_string(u.grade); });

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_property_readonly("video_labels",
                             [](const GroundTruth& t) {
                               std::map<std::string, std::string> out;
                               for (const auto& [id, s] : t.video_labels) out[id] = to_string(s);
                               return out;
                             })
      .def_readonly("uploaders", &GroundTruth::uploaders)
      .def_readonly("bad_comment_ids", &GroundTruth::bad_comment_ids)
      .def_readonly("unsafe_commenters", &GroundTruth::unsafe_commenters)
      .def_readonly("community", &GroundTruth::community);

  m.def("preset", &preset, py::arg("name"), py::arg("seed") = 1);
  m.def("preset_names", &preset_names);
  m.def(
      "generate",
      [](const SynthConfig& cfg) {
        SynthOutput s = generate(cfg);
        return py::make_tuple(std::move(s.corpus), std::move(s.truth));
      },
      py::arg("config"));

  // features
  m.def("feature_names", [] {
    std::vector<std::string> names;
    for (auto n : feature_names()) names.emplace_back(n);
    return names;
  });
  m.def("view_indices",
        [](const std::string& view) { return view_indices(enum_of(view, &parse_feature_view, "feature view")); });
  m.def(
      "feature_matrix",
      [](const Corpus& corpus) {
        const auto rows = extract_corpus(corpus, default_lexicon());
        py::array_t<double> x({rows.size(), kFeatureCount});
        auto w = x.mutable_unchecked<2>();
        std::vector<std::string> ids;
        std::vector<std::optional<std::string>> labels;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          for (std::size_t j = 0; j < kFeatureCount; ++j) w(i, j) = rows[i].features[j];
          ids.push_back(rows[i].video_id);
          labels.push_back(label_str(rows[i].label));
        }
        return py::make_tuple(ids, x, labels);
      },
      py::arg("corpus"), "Returns (video_ids, X with 34 columns, labels or None).");

  // learn
  py::class_<PyModel>(m, "Model")
      .def_property_readonly("dim", [](const PyModel& pm) { return model_dim(pm.model); })
      .def(
          "predict",
          [](const PyModel& pm, const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
            const Model& model = pm.model;
            if (x.ndim() != 2) throw Error(ErrorKind::Parameter, "python", "X must be 2-D");
            const auto n = static_cast<std::size_t>(x.shape(0));
            const auto dim = static_cast<std::size_t>(x.shape(1));
            std::vector<std::string> out;
            for (std::size_t i = 0; i < n; ++i) out.emplace_back(to_string(predict(model, {x.data() + i * dim, dim})));
            return out;
          },
          py::arg("X"))
      .def("dumps", [](const PyModel& pm) {
        std::ostringstream out;
        save_model(out, pm.model);
        return out.str();
      });

  m.def(
      "train",
      [](const std::string& kind, const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
         const std::vector<std::string>& y, std::uint64_t seed, std::size_t k) {
        LearnParams params;
        params.knn_k = k;
        return PyModel{train_model(enum_of(kind, &parse_classifier, "classifier"), dataset_of(x, y), params, seed)};
      },
      py::arg("kind"), py::arg("X"), py::arg("y"), py::arg("seed") = 1, py::arg("k") = 5);
  m.def(
      "loads_model",
      [](const std::string& text) {
        std::istringstream in(text);
        return PyModel{load_model(in)};
      },
      py::arg("text"));
  m.def(
      "evaluate",
      [](const PyModel& pm, const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
         const std::vector<std::string>& y) { return report_dict(evaluate(pm.model, dataset_of(x, y))); },
      py::arg("model"), py::arg("X"), py::arg("y"));
  m.def(
      "compare_feature_views",
      [](const Corpus& corpus, std::uint64_t seed) {
        const Dataset data = make_dataset(extract_corpus(corpus, default_lexicon()), FeatureView::All);
        py::list rows;
        for (const auto& r : compare_feature_views(data, seed)) {
          py::dict d = report_dict(r.report);
          d["classifier"] = display_name(r.classifier);
          d["view"] = view_label(r.view);
          rows.append(d);
        }
        return rows;
      },
      py::arg("corpus"), py::arg("seed") = 1);

  // detect
  py::class_<UploaderVerdict>(m, "UploaderVerdict")
      .def_readonly("user_id", &UploaderVerdict::user_id)
      .def_readonly("n_scored", &UploaderVerdict::n_scored)
      .def_readonly("n_unsafe", &UploaderVerdict::n_unsafe)
      .def_readonly("ratio", &UploaderVerdict::ratio)
      .def_property_readonly("grade", [](const UploaderVerdict& v) { return to_string(v.grade); })
      .def("__repr__", [](const UploaderVerdict& v) {
        return "<UploaderVerdict " + v.user_id + " " + to_string(v.grade) + ">";
      });

  m.def(
      "grade",
      [](double ratio, double moderate, double high, double extreme) {
        return to_string(grade(ratio, GradeThresholds{moderate, high, extreme}));
      },
      py::arg("ratio"), py::arg("moderate") = 1.0 / 3.0, py::arg("high") = 2.0 / 3.0, py::arg("extreme") = 0.9);
  m.def(
      "detect_unsafe_uploaders",
      [](const Corpus& corpus, const PyModel* pm) {
        if (pm) return detect_unsafe_uploaders(corpus, pm->model, default_lexicon());
        return detect_unsafe_uploaders(corpus, VideoPredictor(&corpus_label), default_lexicon());
      },
      py::arg("corpus"), py::arg("model") = nullptr,
      "Grades every uploader. Without a model the corpus labels are used.");
  m.def(
      "detect_unsafe_commenters", [](const Corpus& corpus) { return detect_unsafe_commenters(corpus, default_lexicon()); },
      py::arg("corpus"));

  // graphs
  py::class_<LabeledGraph>(m, "Graph")
      .def(py::init<bool>(), py::arg("undirected") = false)
      .def(
          "add_node",
          [](LabeledGraph& g, std::string id, const std::string& safety) {
            return g.add_node(std::move(id), NodeKind::Uploader, safety_of(safety));
          },
          py::arg("id"), py::arg("safety") = "safe")
      .def(
          "add_edge",
          [](LabeledGraph& g, std::size_t a, std::size_t b) {
            if (a >= g.node_count() || b >= g.node_count())
              throw Error(ErrorKind::Parameter, "python", "edge endpoint out of range");
            return g.add_edge(a, b, Relation::Subscribe);
          },
          py::arg("src"), py::arg("dst"))
      .def_property_readonly("node_count", &LabeledGraph::node_count)
      .def_property_readonly("edge_count", &LabeledGraph::edge_count)
      .def_property_readonly("undirected", &LabeledGraph::undirected)
      .def_property_readonly("node_ids",
                             [](const LabeledGraph& g) {
                               std::vector<std::string> ids;
                               for (const auto& n : g.nodes()) ids.push_back(n.id);
                               return ids;
                             })
      .def_property_readonly("edges", [](const LabeledGraph& g) {
        std::vector<std::pair<std::size_t, std::size_t>> e;
        for (const auto& x : g.edges()) e.emplace_back(x.src, x.dst);
        return e;
      });

  m.def(
      "video_graph", [](const Corpus& corpus, std::size_t th) { return build_video_graph(corpus, corpus_labels(corpus), th); },
      py::arg("corpus"), py::arg("th") = kDefaultRelatedTh);
  m.def(
      "behavior_graph",
      [](const Corpus& corpus) {
        const auto verdicts = detect_unsafe_uploaders(corpus, VideoPredictor(&corpus_label), default_lexicon());
        return build_behavior_graph(corpus, verdicts, detect_unsafe_commenters(corpus, default_lexicon()),
                                    {Relation::Like, Relation::Subscribe, Relation::Playlist})
            .graph;
      },
      py::arg("corpus"), "Uploaders and commenters linked by likes, subscriptions and playlists.");
  m.def("transitions", [](const LabeledGraph& g) { return transitions_dict(transitions(g)); }, py::arg("graph"));

  // community
  py::class_<Partition>(m, "Partition")
      .def_readonly("assignment", &Partition::assignment)
      .def_readonly("communities", &Partition::communities)
      .def_readonly("modularity", &Partition::modularity)
      .def_readonly("level_modularity", &Partition::level_modularity);

  m.def(
      "modularity",
      [](const LabeledGraph& g, const std::vector<std::size_t>& a) { return modularity(g, a); }, py::arg("graph"),
      py::arg("assignment"));
  m.def(
      "louvain", [](const LabeledGraph& g, std::uint64_t seed) { return louvain(g, seed); }, py::arg("graph"),
      py::arg("seed") = 1);
  m.def(
      "adjusted_rand_index",
      [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) { return adjusted_rand_index(a, b); },
      py::arg("a"), py::arg("b"));
  m.def(
      "planted_partition_graph",
      [](std::size_t count, std::size_t size, double p_in, double p_out, std::uint64_t seed) {
        PlantedGraph pg = planted_partition_graph({count, size, p_in, p_out}, seed);
        return py::make_tuple(std::move(pg.graph), pg.membership);
      },
      py::arg("count"), py::arg("size"), py::arg("p_in"), py::arg("p_out"), py::arg("seed") = 1);

  // cli
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a CLI subcommand in-process; returns (exit_code, stdout, stderr).");
}

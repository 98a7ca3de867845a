#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "safewatch/cli.hpp"
#include "safewatch/netgraph.hpp"
#include "support/oracles.hpp"

using namespace safewatch;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const char* base = std::getenv("SAFEWATCH_TEST_TMP");
  fs::path p = base && *base ? fs::path(base) : fs::temp_directory_path() / "safewatch-unit";
  p /= name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files[e.path().filename().string()] = slurp(e.path());
  }
  return files;
}

bool one_error_line(const std::string& err, int code) {
  static const std::regex re(R"(safewatch: error exit=(\d) kind=[a-z]+ module=[a-z]+: [^\n]*\n)");
  std::smatch m;
  return std::regex_match(err, m, re) && std::stoi(m[1]) == code;
}

// Synthesizes a tiny corpus once per directory and returns its path.
fs::path tiny_corpus(const fs::path& dir, int seed = 3) {
  const auto r = run({"synth", "--preset", "tiny", "--seed", std::to_string(seed), "--out", dir.string()});
  REQUIRE(r.code == 0);
  return dir / "corpus.jsonl";
}

}  // namespace

TEST_CASE("usage errors exit 2 with one parseable line") {
  for (const std::vector<std::string>& args : std::vector<std::vector<std::string>>{
           {}, {"frobnicate"}, {"synth", "--no-such-flag"}, {"synth", "--preset", "huge"}, {"graph", "--seed", "x"}}) {
    const auto r = run(args);
    CHECK(r.code == 2);
    CHECK_MESSAGE(one_error_line(r.err, 2), r.err);
  }
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"pipeline", "--help"}).out.find("--preset") != std::string::npos);
}

TEST_CASE("data errors exit 3") {
  const fs::path dir = scratch("data-errors");
  SUBCASE("missing corpus file") {
    const auto r = run({"detect", "--corpus", (dir / "absent.jsonl").string(), "--out", dir.string()});
    CHECK(r.code == 3);
    CHECK(one_error_line(r.err, 3));
    CHECK(r.err.find("module=corpus") != std::string::npos);
  }
  SUBCASE("duplicate video id names the id") {
    std::ofstream(dir / "dup.jsonl") << "{\"format\":\"safewatch-corpus\",\"format_version\":1}\n"
                                     << "{\"user\":{\"user_id\":\"u\"}}\n"
                                     << "{\"video\":{\"video_id\":\"v1\",\"uploader_id\":\"u\",\"label\":\"safe\"}}\n"
                                     << "{\"video\":{\"video_id\":\"v1\",\"uploader_id\":\"u\",\"label\":\"safe\"}}\n";
    const auto r = run({"extract", "--corpus", (dir / "dup.jsonl").string(), "--out", dir.string()});
    CHECK(r.code == 3);
    CHECK(one_error_line(r.err, 3));
    CHECK(r.err.find("kind=integrity") != std::string::npos);
    CHECK(r.err.find("v1") != std::string::npos);
  }
}

TEST_CASE("numeric errors exit 4") {
  const fs::path dir = scratch("numeric-errors");
  const fs::path corpus = tiny_corpus(dir);
  for (const std::vector<std::string>& extra : std::vector<std::vector<std::string>>{
           {"--k", "4"}, {"--moderate", "0.8", "--high", "0.5"}, {"--train-fraction", "1.5"}, {"--th", "0"}}) {
    std::vector<std::string> args = {"pipeline", "--corpus", corpus.string(), "--out", (dir / "o").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run(args);
    CHECK(r.code == 4);
    CHECK_MESSAGE(one_error_line(r.err, 4), r.err);
  }
  const auto both = run({"pipeline", "--preset", "tiny", "--corpus", corpus.string(), "--out", dir.string()});
  CHECK(both.code == 4);
  const auto lex = dir / "empty.txt";
  std::ofstream(lex).flush();
  const auto r = run({"detect", "--corpus", corpus.string(), "--lexicon", lex.string(), "--out", dir.string()});
  CHECK(r.code == 4);
  CHECK(r.err.find("kind=config") != std::string::npos);
}

TEST_CASE("writes are atomic and failures leave no partial files") {
  const fs::path dir = scratch("atomic");
  const fs::path corpus = tiny_corpus(dir);
  const fs::path out = dir / "run";
  CHECK(run({"pipeline", "--corpus", corpus.string(), "--out", out.string()}).code == 0);
  for (const auto& e : fs::directory_iterator(out)) CHECK(e.path().filename().string().find(".tmp") == std::string::npos);

  const fs::path failed = dir / "failed";
  CHECK(run({"pipeline", "--corpus", corpus.string(), "--k", "2", "--out", failed.string()}).code == 4);
  CHECK((!fs::exists(failed) || fs::is_empty(failed)));
}

TEST_CASE("SAFEWATCH_OUT picks the output directory; --out wins") {
  const fs::path dir = scratch("env");
  ::setenv(cli::kOutDirEnv, (dir / "from-env").string().c_str(), 1);
  CHECK(run({"synth", "--preset", "tiny"}).code == 0);
  CHECK(fs::exists(dir / "from-env" / "corpus.jsonl"));
  CHECK(run({"synth", "--preset", "tiny", "--out", (dir / "flag").string()}).code == 0);
  CHECK(fs::exists(dir / "flag" / "corpus.jsonl"));
  ::unsetenv(cli::kOutDirEnv);
}

TEST_CASE("eval --features video gives three video-level rows") {
  const fs::path dir = scratch("eval");
  const fs::path corpus = tiny_corpus(dir);
  const auto r = run({"eval", "--corpus", corpus.string(), "--features", "video", "--out", dir.string()});
  REQUIRE(r.code == 0);
  std::istringstream grid(slurp(dir / "eval_grid.tsv"));
  std::string line;
  std::getline(grid, line);  // header
  std::vector<std::string> rows;
  while (std::getline(grid, line)) rows.push_back(line);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) CHECK(row.find("\tVideo-Level\t") != std::string::npos);
  CHECK(rows[0].rfind("Random Forest\t", 0) == 0);
  CHECK(rows[1].rfind("K-Nearest Neighbor\t", 0) == 0);
  CHECK(rows[2].rfind("Decision Tree\t", 0) == 0);
}

TEST_CASE("graph --kind video --th 10 matches a recount") {
  const fs::path dir = scratch("graph");
  const fs::path corpus_path = tiny_corpus(dir, 8);
  const auto r = run({"graph", "--corpus", corpus_path.string(), "--kind", "video", "--th", "10", "--out",
                      dir.string()});
  REQUIRE(r.code == 0);
  const Corpus corpus = load_corpus(corpus_path);
  const LabeledGraph g = build_video_graph(corpus, corpus_labels(corpus), 10);
  const TransitionMatrix t = oracle::transitions(g);
  std::ostringstream expect;
  expect << "transition\tcount\n"
         << "Safe to Safe\t" << t.safe_safe << "\nSafe to Unsafe\t" << t.safe_unsafe << "\nUnsafe to Safe\t"
         << t.unsafe_safe << "\nUnsafe to Unsafe\t" << t.unsafe_unsafe << "\nTotal\t" << g.edge_count() << '\n';
  CHECK(slurp(dir / "transitions_video.tsv") == expect.str());
  std::size_t lines = 0;
  for (char ch : slurp(dir / "graph_video.edges")) lines += ch == '\n';
  CHECK(lines == g.edge_count());
}

TEST_CASE("pipeline is deterministic and leaves inputs alone") {
  const fs::path dir = scratch("determinism");
  CHECK(run({"pipeline", "--preset", "tiny", "--seed", "7", "--out", (dir / "a").string()}).code == 0);
  CHECK(run({"pipeline", "--preset", "tiny", "--seed", "7", "--out", (dir / "b").string()}).code == 0);
  const auto a = snapshot(dir / "a");
  CHECK(a.size() > 20);
  CHECK(a == snapshot(dir / "b"));
  CHECK(a.count("manifest.json") == 1);
  CHECK(a.at("manifest.json").find("\"seed\"") != std::string::npos);

  const fs::path corpus = dir / "a" / "corpus.jsonl";
  const std::string before = slurp(corpus);
  CHECK(run({"report", "--corpus", corpus.string(), "--out", (dir / "c").string()}).code == 0);
  CHECK(slurp(corpus) == before);
}

TEST_CASE("exit code mapping") {
  CHECK(cli::exit_code(ErrorKind::Parse) == 3);
  CHECK(cli::exit_code(ErrorKind::Integrity) == 3);
  CHECK(cli::exit_code(ErrorKind::Labeling) == 3);
  CHECK(cli::exit_code(ErrorKind::Config) == 4);
  CHECK(cli::exit_code(ErrorKind::Parameter) == 4);
  CHECK(cli::exit_code(ErrorKind::Internal) == 5);
}

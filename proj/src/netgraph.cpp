#include "safewatch/netgraph.hpp"

#include <algorithm>
#include <ostream>

#include "safewatch/error.hpp"
#include "safewatch/features.hpp"

namespace safewatch {

namespace {

[[noreturn]] void labeling_error(const std::string& msg) { throw Error(ErrorKind::Labeling, "netgraph", msg); }

std::uint64_t edge_key(std::size_t src, std::size_t dst, Relation r) {
  return (static_cast<std::uint64_t>(src) << 34) ^ (static_cast<std::uint64_t>(dst) << 3) ^
         static_cast<std::uint64_t>(r);
}

std::unordered_map<std::string, Safety> verdict_safety(std::span<const UploaderVerdict> verdicts) {
  std::unordered_map<std::string, Safety> out;
  for (const auto& v : verdicts) out[v.user_id] = v.safety();
  return out;
}

void xml_escape(std::ostream& out, std::string_view s) {
  for (char ch : s) {
    switch (ch) {
      case '&':
        out << "&amp;";
        break;
      case '<':
        out << "&lt;";
        break;
      case '>':
        out << "&gt;";
        break;
      case '"':
        out << "&quot;";
        break;
      case '\'':
        out << "&apos;";
        break;
      default:
        out << ch;
    }
  }
}

}  // namespace

const char* to_string(NodeKind k) noexcept {
  switch (k) {
    case NodeKind::Video:
      return "video";
    case NodeKind::Uploader:
      return "uploader";
    case NodeKind::Commenter:
      return "commenter";
  }
  return "video";
}

const char* to_string(Relation r) noexcept {
  switch (r) {
    case Relation::Related:
      return "related";
    case Relation::Comment:
      return "comment";
    case Relation::Like:
      return "like";
    case Relation::Subscribe:
      return "subscribe";
    case Relation::Playlist:
      return "playlist";
  }
  return "related";
}

std::optional<Relation> parse_relation(std::string_view text) noexcept {
  for (auto r : {Relation::Related, Relation::Comment, Relation::Like, Relation::Subscribe, Relation::Playlist}) {
    if (text == to_string(r)) return r;
  }
  return std::nullopt;
}

std::size_t LabeledGraph::add_node(std::string id, NodeKind kind, Safety safety) {
  const std::size_t idx = nodes_.size();
  if (!index_.emplace(id, idx).second) throw Error(ErrorKind::Integrity, "netgraph", "duplicate node '" + id + "'");
  nodes_.push_back({std::move(id), kind, safety});
  return idx;
}

bool LabeledGraph::add_edge(std::size_t src, std::size_t dst, Relation relation) {
  if (src >= nodes_.size() || dst >= nodes_.size())
    throw Error(ErrorKind::Internal, "netgraph", "edge endpoint out of range");
  if (src == dst) return false;
  const std::uint64_t key =
      undirected_ ? edge_key(std::min(src, dst), std::max(src, dst), relation) : edge_key(src, dst, relation);
  if (!edge_keys_.insert(key).second) return false;
  edges_.push_back({src, dst, relation});
  return true;
}

std::optional<std::size_t> LabeledGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> LabeledGraph::degrees() const {
  std::vector<std::size_t> deg(nodes_.size(), 0);
  for (const auto& e : edges_) {
    ++deg[e.src];
    ++deg[e.dst];
  }
  return deg;
}

LabeledGraph LabeledGraph::without_isolated() const {
  const auto deg = degrees();
  LabeledGraph g(undirected_);
  std::vector<std::size_t> remap(nodes_.size(), SIZE_MAX);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (deg[i] > 0) remap[i] = g.add_node(nodes_[i].id, nodes_[i].kind, nodes_[i].safety);
  }
  for (const auto& e : edges_) g.add_edge(remap[e.src], remap[e.dst], e.relation);
  return g;
}

std::map<std::string, Safety> corpus_labels(const Corpus& corpus) {
  std::map<std::string, Safety> labels;
  for (const auto& v : corpus.videos()) {
    if (!v.label) labeling_error("video '" + v.video_id + "' has no label");
    labels[v.video_id] = *v.label;
  }
  return labels;
}

LabeledGraph build_video_graph(const Corpus& corpus, const std::map<std::string, Safety>& labels, std::size_t th) {
  if (th == 0) throw Error(ErrorKind::Parameter, "netgraph", "related-video th must be positive");
  LabeledGraph g;
  for (const auto& v : corpus.videos()) {
    auto it = labels.find(v.video_id);
    if (it == labels.end()) labeling_error("video '" + v.video_id + "' has no label");
    g.add_node(v.video_id, NodeKind::Video, it->second);
  }
  for (const auto& v : corpus.videos()) {
    const std::size_t src = *g.find(v.video_id);
    const std::size_t n = std::min(th, v.related.size());
    for (std::size_t k = 0; k < n; ++k) {
      const Ref& r = v.related[k];
      if (r.external) continue;
      if (auto dst = g.find(r.id)) g.add_edge(src, *dst, Relation::Related);
    }
  }
  return g;
}

LabeledGraph build_uploader_graph(const LabeledGraph& video_graph, const Corpus& corpus,
                                  std::span<const UploaderVerdict> verdicts) {
  const auto safety = verdict_safety(verdicts);
  LabeledGraph g;
  std::vector<std::size_t> owner(video_graph.node_count());
  for (std::size_t i = 0; i < video_graph.node_count(); ++i) {
    const auto& node = video_graph.nodes()[i];
    const VideoRecord* v = corpus.find_video(node.id);
    if (!v) labeling_error("video node '" + node.id + "' is not in the corpus");
    auto existing = g.find(v->uploader_id);
    if (existing) {
      owner[i] = *existing;
      continue;
    }
    auto it = safety.find(v->uploader_id);
    if (it == safety.end()) labeling_error("uploader '" + v->uploader_id + "' has no verdict");
    owner[i] = g.add_node(v->uploader_id, NodeKind::Uploader, it->second);
  }
  for (const auto& e : video_graph.edges()) g.add_edge(owner[e.src], owner[e.dst], Relation::Related);
  return g;
}

LabeledGraph build_commenter_graph(const Corpus& corpus, std::span<const UploaderVerdict> verdicts,
                                   const std::set<std::string>& unsafe_commenters, std::size_t min_comments) {
  if (min_comments == 0) throw Error(ErrorKind::Parameter, "netgraph", "min_comments must be positive");
  LabeledGraph g(/*undirected=*/true);
  std::vector<UploaderVerdict> sorted(verdicts.begin(), verdicts.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.user_id < b.user_id; });
  for (const auto& v : sorted) {
    const bool unsafe = v.safety() == Safety::Unsafe || unsafe_commenters.count(v.user_id);
    g.add_node(v.user_id, NodeKind::Uploader, unsafe ? Safety::Unsafe : Safety::Safe);
  }
  for (const auto& cid : corpus.commenter_ids()) {
    const auto& comments = corpus.comments_by(cid);
    if (comments.size() < min_comments) continue;
    std::size_t src;
    if (auto existing = g.find(cid)) {
      src = *existing;
    } else {
      src = g.add_node(cid, NodeKind::Commenter, unsafe_commenters.count(cid) ? Safety::Unsafe : Safety::Safe);
    }
    for (auto ci : comments) {
      const VideoRecord* video = corpus.find_video(corpus.comments()[ci].video_id);
      auto dst = g.find(video->uploader_id);
      if (!dst) labeling_error("uploader '" + video->uploader_id + "' has no verdict");
      g.add_edge(src, *dst, Relation::Comment);
    }
  }
  return g;
}

BehaviorGraph build_behavior_graph(const Corpus& corpus, std::span<const UploaderVerdict> verdicts,
                                   const std::set<std::string>& unsafe_commenters,
                                   const std::set<Relation>& relations) {
  if (relations.empty()) throw Error(ErrorKind::Parameter, "netgraph", "behavior graph needs at least one relation");
  for (auto r : relations) {
    if (r != Relation::Like && r != Relation::Subscribe && r != Relation::Playlist)
      throw Error(ErrorKind::Parameter, "netgraph",
                  std::string("relation '") + to_string(r) + "' is not a behavioral relation");
  }
  BehaviorGraph bg;
  LabeledGraph& g = bg.graph;
  std::vector<UploaderVerdict> sorted(verdicts.begin(), verdicts.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.user_id < b.user_id; });
  for (const auto& v : sorted) {
    const bool unsafe = v.safety() == Safety::Unsafe || unsafe_commenters.count(v.user_id);
    g.add_node(v.user_id, NodeKind::Uploader, unsafe ? Safety::Unsafe : Safety::Safe);
  }
  bg.n_uploaders = g.node_count();
  for (const auto& cid : corpus.commenter_ids()) {
    if (g.find(cid)) continue;
    g.add_node(cid, NodeKind::Commenter, unsafe_commenters.count(cid) ? Safety::Unsafe : Safety::Safe);
  }
  bg.n_commenters = corpus.commenter_ids().size();
  for (auto r : relations) bg.tallies[r] = {};

  const std::size_t n_nodes = g.node_count();
  for (std::size_t src = 0; src < n_nodes; ++src) {
    const GraphNode node = g.nodes()[src];
    const UserRecord* user = corpus.find_user(node.id);
    const int role = node.kind == NodeKind::Commenter ? 1 : 0;

    auto record = [&](Relation rel, std::optional<std::size_t> target) {
      RelationTally& t = bg.tallies[rel][role];
      ++t.total;
      if (!target) {
        ++t.external;
      } else if (*target == src) {
        ++t.self;
      } else {
        (g.nodes()[*target].kind == NodeKind::Commenter ? t.to_commenters : t.to_uploaders)++;
        g.add_edge(src, *target, rel);
      }
    };
    auto video_owner = [&](const Ref& ref) -> std::optional<std::size_t> {
      if (ref.external) return std::nullopt;
      const VideoRecord* v = corpus.find_video(ref.id);
      return v ? g.find(v->uploader_id) : std::nullopt;
    };

    if (relations.count(Relation::Like)) {
      for (const auto& ref : user->liked_videos) record(Relation::Like, video_owner(ref));
    }
    if (relations.count(Relation::Playlist)) {
      for (const auto& ref : user->playlist_videos) record(Relation::Playlist, video_owner(ref));
    }
    if (relations.count(Relation::Subscribe)) {
      for (const auto& ref : user->subscribed_users)
        record(Relation::Subscribe, ref.external ? std::nullopt : g.find(ref.id));
    }
  }
  return bg;
}

TransitionMatrix transitions(const LabeledGraph& g) {
  TransitionMatrix t;
  for (const auto& e : g.edges()) {
    const bool s = g.nodes()[e.src].safety == Safety::Unsafe;
    const bool d = g.nodes()[e.dst].safety == Safety::Unsafe;
    if (!s && !d) {
      ++t.safe_safe;
    } else if (!s) {
      ++t.safe_unsafe;
    } else if (!d) {
      ++t.unsafe_safe;
    } else {
      ++t.unsafe_unsafe;
    }
  }
  return t;
}

void write_edge_list(std::ostream& out, const LabeledGraph& g) {
  for (const auto& e : g.edges())
    out << g.nodes()[e.src].id << ' ' << g.nodes()[e.dst].id << ' ' << to_string(e.relation) << '\n';
}

void write_graphml(std::ostream& out, const LabeledGraph& g, std::span<const std::size_t> community) {
  if (!community.empty() && community.size() != g.node_count())
    throw Error(ErrorKind::Coverage, "netgraph", "community assignment does not cover every node");
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"kind\" for=\"node\" attr.name=\"kind\" attr.type=\"string\"/>\n"
      << "  <key id=\"safety\" for=\"node\" attr.name=\"safety\" attr.type=\"string\"/>\n";
  if (!community.empty()) out << "  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n";
  out << "  <key id=\"relation\" for=\"edge\" attr.name=\"relation\" attr.type=\"string\"/>\n"
      << "  <graph id=\"G\" edgedefault=\"" << (g.undirected() ? "undirected" : "directed") << "\">\n";
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto& n = g.nodes()[i];
    out << "    <node id=\"";
    xml_escape(out, n.id);
    out << "\"><data key=\"kind\">" << to_string(n.kind) << "</data><data key=\"safety\">" << to_string(n.safety)
        << "</data>";
    if (!community.empty()) out << "<data key=\"community\">" << community[i] << "</data>";
    out << "</node>\n";
  }
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    const auto& e = g.edges()[i];
    out << "    <edge id=\"e" << i << "\" source=\"";
    xml_escape(out, g.nodes()[e.src].id);
    out << "\" target=\"";
    xml_escape(out, g.nodes()[e.dst].id);
    out << "\"><data key=\"relation\">" << to_string(e.relation) << "</data></edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

void write_suggestion_report(std::ostream& out, const GraphSummary& video, const GraphSummary& uploader) {
  out << "Description\tVideo-Video\tUploader-Uploader\n";
  out << "Number of Nodes\t" << video.nodes << '\t' << uploader.nodes << '\n';
  out << "Number of Edges\t" << video.edges << '\t' << uploader.edges << '\n';
  out << "Number of Communities\t" << video.communities << '\t' << uploader.communities << '\n';
  out << "Modularity\t" << format_double(video.modularity) << '\t' << format_double(uploader.modularity) << '\n';
  out << "Safe to Safe Transition\t" << video.transitions.safe_safe << '\t' << uploader.transitions.safe_safe << '\n';
  out << "Safe to Unsafe Transition\t" << video.transitions.safe_unsafe << '\t' << uploader.transitions.safe_unsafe
      << '\n';
  out << "Unsafe to Safe Transition\t" << video.transitions.unsafe_safe << '\t' << uploader.transitions.unsafe_safe
      << '\n';
  out << "Unsafe to Unsafe Transition\t" << video.transitions.unsafe_unsafe << '\t'
      << uploader.transitions.unsafe_unsafe << '\n';
}

void write_commenter_report(std::ostream& out, const GraphSummary& s) {
  out << "Transition Type\tCount\n";
  out << "Safe Commenter to Safe Uploader\t" << s.transitions.safe_safe << '\n';
  out << "Unsafe Commenter to Safe Uploader\t" << s.transitions.unsafe_safe << '\n';
  out << "Safe Commenter to Unsafe Uploader\t" << s.transitions.safe_unsafe << '\n';
  out << "Unsafe Commenter to Unsafe Uploader\t" << s.transitions.unsafe_unsafe << '\n';
  out << "Number of Nodes\t" << s.nodes << '\n';
  out << "Number of Edges\t" << s.edges << '\n';
  out << "Number of Communities\t" << s.communities << '\n';
  out << "Modularity\t" << format_double(s.modularity) << '\n';
}

void write_behavior_report(std::ostream& out, const BehaviorGraph& bg) {
  auto header = [&](const char* title) {
    out << "# " << title << '\n'
        << "Description of Behaviour\tCount\n"
        << "Number of Seed Uploaders\t" << bg.n_uploaders << '\n'
        << "Number of Seed Commenters\t" << bg.n_commenters << '\n';
  };
  if (auto it = bg.tallies.find(Relation::Like); it != bg.tallies.end()) {
    const auto& [up, cm] = it->second;
    header("Who likes whom");
    out << "Total Videos liked by Uploaders\t" << up.total << '\n'
        << " - Likes on Videos by Self\t" << up.self << '\n'
        << " - Likes on Videos by Other Uploaders\t" << up.to_uploaders << '\n'
        << " - Likes on Videos by Commenters\t" << up.to_commenters << '\n'
        << " - Likes on Videos by Other Users\t" << up.external << '\n'
        << "Total Videos liked by Commenters\t" << cm.total << '\n'
        << " - Likes on Videos by Self\t" << cm.self << '\n'
        << " - Likes on Videos by Other Commenters\t" << cm.to_commenters << '\n'
        << " - Likes on Videos by Uploaders\t" << cm.to_uploaders << '\n'
        << " - Likes on Videos by Other Users\t" << cm.external << '\n';
  }
  if (auto it = bg.tallies.find(Relation::Subscribe); it != bg.tallies.end()) {
    const auto& [up, cm] = it->second;
    header("Who subscribes whom");
    out << "Total Subscription by Uploaders\t" << up.total << '\n'
        << " - Subscription to Other Uploaders\t" << up.to_uploaders << '\n'
        << " - Subscription to Commenters\t" << up.to_commenters << '\n'
        << " - Subscription to Other Users\t" << up.external << '\n'
        << "Total Subscription by Commenters\t" << cm.total << '\n'
        << " - Subscription to Other Commenters\t" << cm.to_commenters << '\n'
        << " - Subscription to Uploaders\t" << cm.to_uploaders << '\n'
        << " - Subscription to Other Users\t" << cm.external << '\n';
  }
  if (auto it = bg.tallies.find(Relation::Playlist); it != bg.tallies.end()) {
    const auto& [up, cm] = it->second;
    header("Who adds whom to playlist");
    out << "Total Videos in playlist of Uploaders\t" << up.total << '\n'
        << " - Self Videos\t" << up.self << '\n'
        << " - Videos of Other Uploaders\t" << up.to_uploaders << '\n'
        << " - Videos of Commenters\t" << up.to_commenters << '\n'
        << " - Videos of Other Users\t" << up.external << '\n'
        << "Total Videos in playlist of Commenters\t" << cm.total << '\n'
        << " - Self Videos\t" << cm.self << '\n'
        << " - Videos of Other Commenters\t" << cm.to_commenters << '\n'
        << " - Videos of Uploaders\t" << cm.to_uploaders << '\n'
        << " - Videos of Other Users\t" << cm.external << '\n';
  }
}

}  // namespace safewatch

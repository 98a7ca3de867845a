#include "safewatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "safewatch/error.hpp"
#include "safewatch/lexical.hpp"
#include "safewatch/rng.hpp"

namespace safewatch {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, "synth", msg); }

// Independent random streams; one per generation stage so that changing one
// stage does not reshuffle the others.
enum Stream : std::uint64_t {
  kRoles = 1,
  kVideos,
  kText,
  kUsers,
  kComments,
  kAuthors,
  kBadPlan,
  kRelated,
  kPlant,
  kNoise,
};

const std::vector<std::string_view> kNeutralWords = {
    "the",    "cat",   "mouse", "episode", "cartoon", "video",  "today",  "my",     "kids",   "this",
    "again",  "song",  "part",  "first",   "so",      "is",     "was",    "we",     "watch",  "watched",
    "toy",    "train", "dance", "color",   "learn",   "abc",    "numbers", "story", "time",   "play",
    "new",    "little", "big",  "baby",    "family",  "friends", "school", "sister", "brother", "dog",
    "bunny",  "house", "car",   "pink",    "blue",    "with",   "and",    "for",    "when",   "next"};

const std::vector<std::string_view> kTitleWords = {
    "cartoon", "episode", "kids",  "song",      "nursery",   "rhymes",  "toy",   "unboxing", "story",
    "colors",  "learn",   "abc",   "baby",      "shark",     "family",  "finger", "dance",   "adventure",
    "full",    "compilation", "new", "season",  "princess",  "superhero", "prank", "challenge", "world"};

std::string pad_id(std::string_view prefix, std::size_t i, std::size_t n) {
  const int width = std::max(4, static_cast<int>(std::to_string(n).size()));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return std::string(prefix) + buf;
}

std::uint64_t lognormal_count(Rng& rng, double mu, double sigma, double shift) {
  const double v = std::exp(mu + sigma * rng.normal() + shift);
  return static_cast<std::uint64_t>(std::llround(std::min(v, 1e15)));
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[static_cast<std::size_t>(rng.below(items.size()))];
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

// Calls visit(k) for each k in [0, n) independently with probability p,
// jumping over misses geometrically.
template <typename F>
void sample_indices(std::uint64_t n, double p, Rng& rng, F&& visit) {
  if (p <= 0.0 || n == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t k = 0; k < n; ++k) visit(k);
    return;
  }
  const double log_q = std::log1p(-p);
  std::uint64_t k = 0;
  while (true) {
    const double u = 1.0 - rng.uniform();  // (0, 1]
    const double skip = std::floor(std::log(u) / log_q);
    if (skip >= static_cast<double>(n - k)) return;
    k += static_cast<std::uint64_t>(skip);
    visit(k);
    if (++k >= n) return;
  }
}

// Index of the k-th unordered pair (i < j) of s items.
std::pair<std::size_t, std::size_t> pair_at(std::uint64_t k, std::size_t s) {
  std::size_t i = 0;
  std::uint64_t row = s - 1;
  while (k >= row) {
    k -= row;
    ++i;
    --row;
  }
  return {i, i + 1 + static_cast<std::size_t>(k)};
}

// Visits every planted pair (member index a, member index b) of a
// planted-partition graph over count*size members, block-major.
template <typename F>
void planted_pairs(const CommunityPlant& plant, Rng& rng, F&& visit) {
  const std::size_t s = plant.size;
  for (std::size_t b = 0; b < plant.count; ++b) {
    const std::uint64_t n_pairs = static_cast<std::uint64_t>(s) * (s - 1) / 2;
    sample_indices(n_pairs, plant.p_in, rng, [&](std::uint64_t k) {
      auto [i, j] = pair_at(k, s);
      visit(b * s + i, b * s + j);
    });
  }
  for (std::size_t a = 0; a < plant.count; ++a) {
    for (std::size_t b = a + 1; b < plant.count; ++b) {
      sample_indices(static_cast<std::uint64_t>(s) * s, plant.p_out, rng, [&](std::uint64_t k) {
        visit(a * s + static_cast<std::size_t>(k / s), b * s + static_cast<std::size_t>(k % s));
      });
    }
  }
}

void check_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) config_error(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

void SynthConfig::validate() const {
  if (n_uploaders == 0) config_error("n_uploaders must be positive");
  if (n_videos < n_uploaders) config_error("n_videos must be at least n_uploaders (every uploader owns a video)");
  if (videos_per_uploader.lo < 1 || videos_per_uploader.lo > videos_per_uploader.hi)
    config_error("videos_per_uploader range is empty or below 1");
  const auto lo_total = static_cast<std::int64_t>(n_uploaders) * videos_per_uploader.lo;
  const auto hi_total = static_cast<std::int64_t>(n_uploaders) * videos_per_uploader.hi;
  if (static_cast<std::int64_t>(n_videos) < lo_total || static_cast<std::int64_t>(n_videos) > hi_total)
    config_error("n_videos cannot be split over n_uploaders within videos_per_uploader");
  if (comments_per_video.lo < 0 || comments_per_video.lo > comments_per_video.hi)
    config_error("comments_per_video range is empty or negative");
  if (n_commenters > 0 && comments_per_video.hi == 0) config_error("commenters need comments_per_video.hi > 0");
  if (static_cast<std::int64_t>(n_commenters) > static_cast<std::int64_t>(n_videos) * comments_per_video.hi)
    config_error("too few comment slots to give every commenter a comment");
  check_fraction(unsafe_uploader_fraction, "unsafe_uploader_fraction");
  check_fraction(unsafe_video_rate, "unsafe_video_rate");
  check_fraction(unsafe_comment_rate, "unsafe_comment_rate");
  check_fraction(isolated_video_fraction, "isolated_video_fraction");
  for (double s : {signal.video, signal.user, signal.comment}) {
    if (!(s >= 0.0 && s <= 10.0)) config_error("signal strengths must lie in [0, 10]");
  }
  if (bad_comments) {
    if (bad_comments->authors > bad_comments->comments)
      config_error("bad comment plan has more authors than comments");
    if (bad_comments->authors > n_commenters) config_error("bad comment plan has more authors than commenters");
    if (bad_comments->comments > 0 && bad_comments->authors == 0)
      config_error("bad comment plan needs at least one author");
  }
  check_fraction(plant.p_in, "plant.p_in");
  check_fraction(plant.p_out, "plant.p_out");
  if (plant.count > 0) {
    if (plant.size < 2) config_error("planted communities need at least 2 members");
    if (plant.count * plant.size > n_uploaders + n_commenters)
      config_error("planted communities exceed the user count");
    if (plant.count > 1 && !(plant.p_in > plant.p_out)) config_error("plant needs p_in > p_out");
  }
  if (video_cap == 0) config_error("video_cap must be positive");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"tiny", "paper-scale", "stress"};
  return names;
}

SynthConfig preset(std::string_view name, std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  if (name == "tiny") {
    c.n_uploaders = 10;
    c.n_commenters = 30;
    c.n_videos = 20;
    c.videos_per_uploader = {1, 5};
    c.comments_per_video = {2, 5};
    c.unsafe_uploader_fraction = 0.3;
    c.unsafe_comment_rate = 0.1;
    c.plant = {3, 8, 0.6, 0.05};
  } else if (name == "paper-scale") {
    c.n_uploaders = 275;
    c.n_commenters = 19099;
    c.n_videos = 408;
    c.videos_per_uploader = {1, 50};
    c.comments_per_video = {20, 84};
    c.unsafe_uploader_fraction = 0.3;
    c.bad_comments = BadCommentPlan{1814, 1755};
    c.plant = {10, 40, 0.25, 0.005};
  } else if (name == "stress") {
    c.n_uploaders = 2000;
    c.n_commenters = 8000;
    c.n_videos = 4000;
    c.videos_per_uploader = {1, 10};
    c.comments_per_video = {2, 3};
    c.unsafe_uploader_fraction = 0.3;
    c.unsafe_comment_rate = 0.02;
    c.plant = {50, 200, 0.09, 0.0002};
  } else {
    config_error("unknown preset '" + std::string(name) + "' (expected tiny, paper-scale or stress)");
  }
  return c;
}

SynthOutput generate(const SynthConfig& cfg) {
  cfg.validate();
  const Lexicon& lex = default_lexicon();
  const std::vector<std::string> bad(lex.bad_words.begin(), lex.bad_words.end());
  const std::vector<std::string> positive(lex.positive_words.begin(), lex.positive_words.end());
  const std::vector<std::string> negative(lex.negative_words.begin(), lex.negative_words.end());
  const auto& smileys = emoticons();
  const SignalStrength& sig = cfg.signal;

  GroundTruth truth;

  // --- roles -------------------------------------------------------------
  Rng role_rng(derive_seed(cfg.seed, kRoles));
  const std::size_t n_up = cfg.n_uploaders;
  const std::size_t n_cm = cfg.n_commenters;
  std::vector<std::string> uploader_ids(n_up);
  std::vector<std::string> commenter_ids(n_cm);
  for (std::size_t i = 0; i < n_up; ++i) uploader_ids[i] = pad_id("up", i, n_up);
  for (std::size_t i = 0; i < n_cm; ++i) commenter_ids[i] = pad_id("cm", i, n_cm);

  const auto n_unsafe_up =
      static_cast<std::size_t>(std::llround(cfg.unsafe_uploader_fraction * static_cast<double>(n_up)));
  std::vector<std::size_t> up_order(n_up);
  std::iota(up_order.begin(), up_order.end(), std::size_t{0});
  role_rng.shuffle(std::span<std::size_t>(up_order));
  std::vector<bool> up_unsafe(n_up, false);
  for (std::size_t k = 0; k < n_unsafe_up; ++k) up_unsafe[up_order[k]] = true;

  // Videos per uploader: everyone gets lo, the rest go to a prolific fifth.
  std::vector<std::size_t> n_vids(n_up, static_cast<std::size_t>(cfg.videos_per_uploader.lo));
  {
    std::size_t extra = cfg.n_videos - n_up * static_cast<std::size_t>(cfg.videos_per_uploader.lo);
    std::vector<std::size_t> pool(up_order.begin(), up_order.end());
    role_rng.shuffle(std::span<std::size_t>(pool));
    std::size_t prolific = std::max<std::size_t>(1, n_up / 5);
    const auto cap = static_cast<std::size_t>(cfg.videos_per_uploader.hi);
    while (extra > 0) {
      const std::size_t pick_i = pool[static_cast<std::size_t>(role_rng.below(prolific))];
      if (n_vids[pick_i] < cap) {
        ++n_vids[pick_i];
        --extra;
      } else if (prolific < n_up) {
        ++prolific;  // widen the pool once the prolific uploaders are full
      }
    }
  }

  // Topics cluster suggestions: a handful of safe and unsafe topics.
  const std::size_t n_safe_up = n_up - n_unsafe_up;
  const std::size_t safe_topics = std::max<std::size_t>(1, n_safe_up / 10);
  const std::size_t unsafe_topics = std::max<std::size_t>(1, n_unsafe_up / 10);
  std::vector<std::size_t> up_topic(n_up);
  for (std::size_t i = 0; i < n_up; ++i) {
    up_topic[i] = up_unsafe[i] ? safe_topics + static_cast<std::size_t>(role_rng.below(unsafe_topics))
                               : static_cast<std::size_t>(role_rng.below(safe_topics));
  }

  // --- videos ------------------------------------------------------------
  Rng vid_rng(derive_seed(cfg.seed, kVideos));
  Rng text_rng(derive_seed(cfg.seed, kText));
  std::vector<VideoRecord> videos;
  videos.reserve(cfg.n_videos);
  std::vector<std::size_t> video_owner;
  std::vector<std::vector<std::size_t>> owned(n_up);
  for (std::size_t u = 0; u < n_up; ++u) {
    std::vector<bool> labels(n_vids[u], false);
    if (up_unsafe[u]) {
      bool any = false;
      for (std::size_t k = 0; k < labels.size(); ++k) {
        labels[k] = vid_rng.bernoulli(cfg.unsafe_video_rate);
        any = any || labels[k];
      }
      if (!any) labels[static_cast<std::size_t>(vid_rng.below(labels.size()))] = true;
    }
    // Newest first: ages grow along the uploader's list.
    std::vector<std::uint64_t> ages(n_vids[u]);
    for (auto& a : ages) a = static_cast<std::uint64_t>(vid_rng.between(1, 2500));
    std::sort(ages.begin(), ages.end());

    for (std::size_t k = 0; k < n_vids[u]; ++k) {
      const double y = labels[k] ? 1.0 : 0.0;
      const double s = sig.video * y;
      VideoRecord v;
      v.video_id = pad_id("vid", videos.size(), cfg.n_videos);
      v.uploader_id = uploader_ids[u];
      v.age_days = ages[k];
      v.video_type = vid_rng.between(1, 8);
      v.view_count = std::max<std::uint64_t>(1, lognormal_count(vid_rng, 8.5, 1.2, -1.0 * s));
      const double vc = static_cast<double>(v.view_count);
      v.like_count = static_cast<std::uint64_t>(std::llround(vc * std::exp(-3.5 + 0.4 * vid_rng.normal() - 0.8 * s)));
      v.dislike_count =
          static_cast<std::uint64_t>(std::llround(vc * std::exp(-6.0 + 0.5 * vid_rng.normal() + 1.0 * s)));
      v.duration_s = 60 + lognormal_count(vid_rng, 5.3, 0.5, 0.4 * s);

      // Title.
      std::vector<std::string> title;
      const auto n_title = static_cast<std::size_t>(text_rng.between(3, 7));
      for (std::size_t w = 0; w < n_title; ++w) title.emplace_back(pick(text_rng, kTitleWords));
      if (text_rng.bernoulli(std::min(1.0, 0.3 * s))) title.insert(title.begin(), pick(text_rng, bad));
      if (text_rng.bernoulli(std::min(1.0, 0.6 * s))) {
        title.emplace_back("18+");
      } else if (y == 0.0 && text_rng.bernoulli(0.03)) {
        title.emplace_back("part");
        title.emplace_back("18");
      }

      // Description: safe ones echo the title more and are longer.
      std::vector<std::string> desc;
      const auto n_desc = static_cast<std::size_t>(text_rng.between(8, 24) * (1.0 - 0.3 * std::min(1.0, s)));
      for (std::size_t w = 0; w < n_desc; ++w) desc.emplace_back(pick(text_rng, kNeutralWords));
      const std::size_t echo = static_cast<std::size_t>(text_rng.between(0, 3)) +
                               (text_rng.bernoulli(std::max(0.0, 1.0 - 0.7 * s)) ? 2 : 0);
      for (std::size_t w = 0; w < echo && w < title.size(); ++w) {
        desc.insert(desc.begin() + static_cast<std::ptrdiff_t>(text_rng.below(desc.size() + 1)), title[w]);
      }
      if (text_rng.bernoulli(std::min(1.0, 0.5 * s))) desc.emplace_back(pick(text_rng, bad));
      std::string description = join_words(desc);
      const auto n_q = static_cast<std::size_t>(text_rng.between(0, 1 + static_cast<std::int64_t>(std::llround(3 * s))));
      for (std::size_t q = 0; q < n_q; ++q) description += (q == 0 ? " why?" : "?");
      const auto n_links =
          static_cast<std::size_t>(text_rng.between(0, 1 + static_cast<std::int64_t>(std::llround(2 * s))));
      for (std::size_t l = 0; l < n_links; ++l) description += " https://example.org/" + v.video_id + "/" + std::to_string(l);
      const auto n_smiley = static_cast<std::size_t>(text_rng.between(0, y == 0.0 ? 3 : 1));
      for (std::size_t e = 0; e < n_smiley; ++e) description += " " + pick(text_rng, smileys);
      v.title = join_words(title);
      v.description = std::move(description);
      v.label = labels[k] ? Safety::Unsafe : Safety::Safe;
      truth.video_labels[v.video_id] = *v.label;
      owned[u].push_back(videos.size());
      video_owner.push_back(u);
      videos.push_back(std::move(v));
    }
  }
  const std::size_t n_v = videos.size();

  // Related lists: topic-clustered corpus entries scattered among external ids.
  {
    Rng rng(derive_seed(cfg.seed, kRelated));
    std::vector<std::vector<std::size_t>> by_topic(safe_topics + unsafe_topics);
    for (std::size_t i = 0; i < n_v; ++i) by_topic[up_topic[video_owner[i]]].push_back(i);
    for (std::size_t i = 0; i < n_v; ++i) {
      const std::size_t len = cfg.related_per_video;
      std::vector<Ref> rel(len);
      for (std::size_t p = 0; p < len; ++p) rel[p] = {"ext-" + videos[i].video_id + "-" + std::to_string(p), true};
      if (len > 0 && !rng.bernoulli(cfg.isolated_video_fraction)) {
        const auto n_in = static_cast<std::size_t>(rng.between(1, 3));
        std::vector<std::size_t> chosen;
        for (std::size_t t = 0; t < n_in; ++t) {
          const auto& same = by_topic[up_topic[video_owner[i]]];
          const std::size_t j = rng.bernoulli(0.85) ? same[static_cast<std::size_t>(rng.below(same.size()))]
                                                    : static_cast<std::size_t>(rng.below(n_v));
          if (j == i || std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
          chosen.push_back(j);
          rel[static_cast<std::size_t>(rng.below(len))] = {videos[j].video_id, false};
        }
      }
      // Overwrites may have dropped duplicates; keep first occurrence only.
      std::vector<Ref> unique;
      for (auto& r : rel) {
        if (std::none_of(unique.begin(), unique.end(), [&](const Ref& x) { return x.id == r.id; }))
          unique.push_back(std::move(r));
      }
      videos[i].related = std::move(unique);
    }
  }

  // --- comments ----------------------------------------------------------
  Rng cm_rng(derive_seed(cfg.seed, kComments));
  std::vector<std::size_t> per_video(n_v);
  std::size_t n_comments = 0;
  for (auto& c : per_video) {
    c = static_cast<std::size_t>(cm_rng.between(cfg.comments_per_video.lo, cfg.comments_per_video.hi));
    n_comments += c;
  }
  // Top up so every commenter can author at least one comment.
  while (n_comments < n_cm) {
    const auto i = static_cast<std::size_t>(cm_rng.below(n_v));
    if (static_cast<std::int64_t>(per_video[i]) < cfg.comments_per_video.hi) {
      ++per_video[i];
      ++n_comments;
    }
  }
  if (n_cm == 0) n_comments = 0;

  std::vector<std::size_t> comment_video;
  comment_video.reserve(n_comments);
  if (n_cm > 0) {
    for (std::size_t i = 0; i < n_v; ++i) comment_video.insert(comment_video.end(), per_video[i], i);
  }
  // Authors: each commenter once, the surplus mostly from a heavy minority.
  std::vector<std::size_t> author(n_comments);
  {
    Rng rng(derive_seed(cfg.seed, kAuthors));
    std::vector<std::size_t> slots(n_comments);
    std::size_t k = 0;
    for (; k < n_cm; ++k) slots[k] = k;
    const std::size_t heavy = std::max<std::size_t>(1, n_cm / 50);
    for (; k < n_comments; ++k)
      slots[k] = rng.bernoulli(0.8) ? static_cast<std::size_t>(rng.below(heavy)) : static_cast<std::size_t>(rng.below(n_cm));
    rng.shuffle(std::span<std::size_t>(slots));
    author = std::move(slots);
  }

  // Which comments carry a bad word.
  std::vector<bool> is_bad(n_comments, false);
  if (cfg.bad_comments) {
    Rng rng(derive_seed(cfg.seed, kBadPlan));
    const auto& plan = *cfg.bad_comments;
    std::vector<std::vector<std::size_t>> by_author(n_cm);
    for (std::size_t c = 0; c < n_comments; ++c) by_author[author[c]].push_back(c);
    auto on_unsafe = [&](std::size_t c) { return videos[comment_video[c]].label == Safety::Unsafe; };
    std::vector<std::size_t> cand(n_cm);
    std::iota(cand.begin(), cand.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(cand));
    if (sig.comment > 0.0) {
      std::stable_partition(cand.begin(), cand.end(), [&](std::size_t a) {
        return std::any_of(by_author[a].begin(), by_author[a].end(), on_unsafe);
      });
    }
    std::vector<std::size_t> spare;
    for (std::size_t t = 0; t < plan.authors; ++t) {
      auto mine = by_author[cand[t]];
      rng.shuffle(std::span<std::size_t>(mine));
      if (sig.comment > 0.0) std::stable_partition(mine.begin(), mine.end(), on_unsafe);
      is_bad[mine.front()] = true;
      spare.insert(spare.end(), mine.begin() + 1, mine.end());
    }
    const std::size_t extra = plan.comments - plan.authors;
    if (spare.size() < extra)
      config_error("bad comment plan needs " + std::to_string(extra) + " repeat comments but the chosen authors have " +
                   std::to_string(spare.size()));
    std::sort(spare.begin(), spare.end());
    rng.shuffle(std::span<std::size_t>(spare));
    if (sig.comment > 0.0) std::stable_partition(spare.begin(), spare.end(), on_unsafe);
    for (std::size_t t = 0; t < extra; ++t) is_bad[spare[t]] = true;
  } else if (cfg.unsafe_comment_rate > 0.0) {
    Rng rng(derive_seed(cfg.seed, kBadPlan));
    for (std::size_t c = 0; c < n_comments; ++c) {
      const double y = videos[comment_video[c]].label == Safety::Unsafe ? 1.0 : 0.0;
      is_bad[c] = rng.bernoulli(std::min(1.0, cfg.unsafe_comment_rate * (1.0 + 4.0 * sig.comment * y)));
    }
  }

  std::vector<CommentRecord> comments;
  comments.reserve(n_comments);
  for (std::size_t c = 0; c < n_comments; ++c) {
    const auto& v = videos[comment_video[c]];
    const double s = sig.comment * (v.label == Safety::Unsafe ? 1.0 : 0.0);
    CommentRecord cm;
    cm.comment_id = pad_id("c", c, n_comments);
    cm.video_id = v.video_id;
    cm.author_id = commenter_ids[author[c]];
    std::vector<std::string> words;
    const auto n_words = static_cast<std::size_t>(cm_rng.between(3, 10));
    for (std::size_t w = 0; w < n_words; ++w) words.emplace_back(pick(cm_rng, kNeutralWords));
    const double u = cm_rng.uniform();
    const double p_pos = std::max(0.0, 0.45 - 0.25 * s);
    const double p_neg = std::min(1.0 - p_pos, 0.1 + 0.25 * s);
    if (u < p_pos) {
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(cm_rng.below(words.size() + 1)), pick(cm_rng, positive));
    } else if (u < p_pos + p_neg) {
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(cm_rng.below(words.size() + 1)), pick(cm_rng, negative));
    }
    if (is_bad[c]) {
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(cm_rng.below(words.size() + 1)), pick(cm_rng, bad));
      truth.bad_comment_ids.insert(cm.comment_id);
      truth.unsafe_commenters.insert(cm.author_id);
    }
    cm.text = join_words(words);
    if (cm_rng.bernoulli(0.2)) cm.text += "!";
    const double likes = std::exp(0.8 + 1.0 * cm_rng.normal() - 0.7 * s) - 1.0;
    cm.like_count = static_cast<std::uint64_t>(std::max(0.0, std::floor(likes)));
    const double replies = std::exp(0.2 + 0.8 * cm_rng.normal() - 0.5 * s) - 1.0;
    cm.reply_count = static_cast<std::uint64_t>(std::max(0.0, std::floor(replies)));
    comments.push_back(std::move(cm));
  }
  for (std::size_t i = 0; i < n_v; ++i) {
    const double extra = std::exp(-6.0 + 0.5 * cm_rng.normal()) * static_cast<double>(videos[i].view_count);
    videos[i].comment_count = per_video[i] + static_cast<std::uint64_t>(std::llround(extra));
  }

  // --- users -------------------------------------------------------------
  Rng user_rng(derive_seed(cfg.seed, kUsers));
  std::vector<UserRecord> users;
  users.reserve(n_up + n_cm);
  // Popularity draws; unsafe ones are capped by safe quantiles so their
  // ECDF never lies below the safe one.
  auto popularity = [&](double mu, double sigma, double shift) {
    std::vector<double> vals(n_up);
    for (std::size_t u = 0; u < n_up; ++u)
      vals[u] = std::floor(std::exp(mu + sigma * user_rng.normal() - (up_unsafe[u] ? shift : 0.0)));
    if (cfg.unsafe_less_popular && n_unsafe_up > 0 && n_safe_up > 0) {
      std::vector<double> s_vals;
      std::vector<std::size_t> u_idx;
      for (std::size_t u = 0; u < n_up; ++u) {
        if (up_unsafe[u]) {
          u_idx.push_back(u);
        } else {
          s_vals.push_back(vals[u]);
        }
      }
      std::sort(s_vals.begin(), s_vals.end());
      std::vector<double> u_vals;
      for (auto u : u_idx) u_vals.push_back(vals[u]);
      std::vector<std::size_t> rank(u_idx.size());
      std::iota(rank.begin(), rank.end(), std::size_t{0});
      std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return u_vals[a] < u_vals[b]; });
      for (std::size_t i = 0; i < rank.size(); ++i) {
        const std::size_t q = i * s_vals.size() / rank.size();
        vals[u_idx[rank[i]]] = std::min(u_vals[rank[i]], s_vals[q]);
      }
    }
    return vals;
  };
  const double su = sig.user;
  const auto subscribers = popularity(6.5, 1.5, 1.5 * su);
  const auto total_views = popularity(11.0, 1.5, 1.5 * su);
  const auto circled = popularity(4.0, 1.2, 1.0 * su);
  for (std::size_t u = 0; u < n_up; ++u) {
    const double s = su * (up_unsafe[u] ? 1.0 : 0.0);
    UserRecord r;
    r.user_id = uploader_ids[u];
    r.is_uploader = true;
    r.total_videos = n_vids[u] + lognormal_count(user_rng, 2.5, 1.0, -1.0 * s);
    r.total_views = static_cast<std::uint64_t>(total_views[u]);
    r.total_comments = lognormal_count(user_rng, 5.0, 1.2, -0.8 * s);
    r.subscriber_count = static_cast<std::uint64_t>(subscribers[u]);
    std::vector<std::string> ct;
    const auto n_ct = static_cast<std::size_t>(user_rng.between(1, 4));
    for (std::size_t w = 0; w < n_ct; ++w) ct.emplace_back(pick(user_rng, kTitleWords));
    r.channel_title = join_words(ct);
    std::vector<std::string> cd;
    const auto n_cd = static_cast<std::size_t>(std::max<std::int64_t>(
        0, user_rng.between(5, 30) - static_cast<std::int64_t>(std::llround(10 * std::min(1.0, s)))));
    for (std::size_t w = 0; w < n_cd; ++w) cd.emplace_back(pick(user_rng, kNeutralWords));
    r.channel_description = join_words(cd);
    r.age_days = static_cast<std::uint64_t>(std::max<std::int64_t>(
        1, user_rng.between(200, 4000) - static_cast<std::int64_t>(std::llround(800 * s))));
    if (!user_rng.bernoulli(0.25)) {
      r.circled_by_count = static_cast<std::uint64_t>(circled[u]);
      r.plus_one_count = lognormal_count(user_rng, 3.0, 1.0, -0.8 * s);
    }
    users.push_back(std::move(r));
  }
  for (std::size_t c = 0; c < n_cm; ++c) {
    UserRecord r;
    r.user_id = commenter_ids[c];
    r.is_commenter = true;
    r.total_videos = static_cast<std::uint64_t>(user_rng.between(0, 3));
    r.total_views = lognormal_count(user_rng, 3.0, 1.5, 0.0);
    r.total_comments = lognormal_count(user_rng, 3.0, 1.0, 0.0);
    r.subscriber_count = lognormal_count(user_rng, 1.0, 1.0, 0.0);
    r.channel_title = std::string(pick(user_rng, kNeutralWords));
    r.age_days = static_cast<std::uint64_t>(user_rng.between(30, 4000));
    if (user_rng.bernoulli(0.5)) {
      r.circled_by_count = lognormal_count(user_rng, 1.0, 1.0, 0.0);
      r.plus_one_count = lognormal_count(user_rng, 0.5, 1.0, 0.0);
    }
    users.push_back(std::move(r));
  }
  // Background activity that never becomes a graph edge: self likes and
  // playlists, external likes, playlists and subscriptions.
  {
    Rng rng(derive_seed(cfg.seed, kNoise));
    for (std::size_t k = 0; k < users.size(); ++k) {
      UserRecord& r = users[k];
      const bool up = k < n_up;
      if (up && rng.bernoulli(0.2)) r.liked_videos.push_back({videos[owned[k][0]].video_id, false});
      if (up && rng.bernoulli(0.3)) r.playlist_videos.push_back({videos[owned[k].back()].video_id, false});
      const auto n_like = static_cast<std::size_t>(rng.between(0, up ? 3 : 1));
      for (std::size_t t = 0; t < n_like; ++t)
        r.liked_videos.push_back({"xv-" + std::to_string(rng.below(1000000)), true});
      const auto n_pl = static_cast<std::size_t>(rng.between(0, up ? 2 : 1));
      for (std::size_t t = 0; t < n_pl; ++t)
        r.playlist_videos.push_back({"xv-" + std::to_string(rng.below(1000000)), true});
      const auto n_sub = static_cast<std::size_t>(rng.between(0, 2));
      for (std::size_t t = 0; t < n_sub; ++t)
        r.subscribed_users.push_back({"xu-" + std::to_string(rng.below(1000000)), true});
    }
  }

  // Planted behavioral communities among seed users.
  if (cfg.plant.count > 0) {
    Rng rng(derive_seed(cfg.seed, kPlant));
    std::vector<std::size_t> members(users.size());
    std::iota(members.begin(), members.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(members));
    members.resize(cfg.plant.count * cfg.plant.size);
    for (std::size_t m = 0; m < members.size(); ++m) truth.community[users[members[m]].user_id] = m / cfg.plant.size;
    planted_pairs(cfg.plant, rng, [&](std::size_t a, std::size_t b) {
      std::size_t src = members[a];
      std::size_t dst = members[b];
      if (rng.bernoulli(0.5)) std::swap(src, dst);
      Relation rel = Relation::Subscribe;
      if (dst < n_up) {
        const auto r = rng.below(3);
        rel = r == 0 ? Relation::Like : (r == 1 ? Relation::Subscribe : Relation::Playlist);
      }
      UserRecord& s = users[src];
      if (rel == Relation::Subscribe) {
        s.subscribed_users.push_back({users[dst].user_id, false});
      } else {
        const auto& vids = owned[dst];
        const auto& vid = videos[vids[static_cast<std::size_t>(rng.below(vids.size()))]].video_id;
        (rel == Relation::Like ? s.liked_videos : s.playlist_videos).push_back({vid, false});
      }
      truth.behavior_edges.push_back({s.user_id, users[dst].user_id, rel});
    });
    std::sort(truth.behavior_edges.begin(), truth.behavior_edges.end());
  }

  // Planted verdicts over the first video_cap videos of each uploader.
  for (std::size_t u = 0; u < n_up; ++u) {
    PlantedUploader p;
    p.user_id = uploader_ids[u];
    p.unsafe = up_unsafe[u];
    p.n_scored = std::min(cfg.video_cap, owned[u].size());
    for (std::size_t k = 0; k < p.n_scored; ++k) p.n_unsafe += videos[owned[u][k]].label == Safety::Unsafe;
    p.ratio = static_cast<double>(p.n_unsafe) / static_cast<double>(p.n_scored);
    p.grade = grade(p.ratio);
    truth.uploaders.push_back(std::move(p));
  }
  std::sort(truth.uploaders.begin(), truth.uploaders.end(),
            [](const auto& a, const auto& b) { return a.user_id < b.user_id; });

  return {Corpus::build(std::move(videos), std::move(users), std::move(comments)), std::move(truth)};
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
  auto line = [&](const json& j) { out << j.dump() << '\n'; };
  line(json{{"format", "safewatch-truth"}, {"format_version", 1}});
  for (const auto& [id, s] : truth.video_labels) line(json{{"video_label", {{"video_id", id}, {"label", to_string(s)}}}});
  for (const auto& u : truth.uploaders) {
    line(json{{"uploader",
               {{"user_id", u.user_id},
                {"unsafe", u.unsafe},
                {"n_scored", u.n_scored},
                {"n_unsafe", u.n_unsafe},
                {"ratio", u.ratio},
                {"grade", to_string(u.grade)}}}});
  }
  for (const auto& id : truth.bad_comment_ids) line(json{{"bad_comment", id}});
  for (const auto& id : truth.unsafe_commenters) line(json{{"unsafe_commenter", id}});
  for (const auto& [id, c] : truth.community) line(json{{"community", {{"user_id", id}, {"block", c}}}});
  for (const auto& e : truth.behavior_edges)
    line(json{{"behavior_edge", {{"src", e.src}, {"dst", e.dst}, {"relation", to_string(e.relation)}}}});
}

GroundTruth read_ground_truth(std::istream& in, std::string_view source_name) {
  GroundTruth t;
  std::string text;
  std::size_t line_no = 0;
  bool header = false;
  auto fail = [&](const std::string& msg) -> void {
    throw Error(ErrorKind::Parse, "synth", std::string(source_name) + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    try {
      const json j = json::parse(text);
      if (!header) {
        if (j.value("format", "") != "safewatch-truth" || j.value("format_version", 0) != 1)
          fail("expected a safewatch-truth version 1 header");
        header = true;
        continue;
      }
      if (!j.is_object() || j.size() != 1) fail("record must have exactly one key");
      const auto& [key, v] = *j.items().begin();
      if (key == "video_label") {
        auto s = parse_safety(v.at("label").get<std::string>());
        if (!s) fail("bad label");
        t.video_labels[v.at("video_id").get<std::string>()] = *s;
      } else if (key == "uploader") {
        PlantedUploader u;
        u.user_id = v.at("user_id").get<std::string>();
        u.unsafe = v.at("unsafe").get<bool>();
        u.n_scored = v.at("n_scored").get<std::size_t>();
        u.n_unsafe = v.at("n_unsafe").get<std::size_t>();
        u.ratio = v.at("ratio").get<double>();
        const auto g = v.at("grade").get<std::string>();
        bool ok = false;
        for (auto gr : {Grade::Safe, Grade::Moderate, Grade::High, Grade::Extreme}) {
          if (g == to_string(gr)) {
            u.grade = gr;
            ok = true;
          }
        }
        if (!ok) fail("bad grade '" + g + "'");
        t.uploaders.push_back(std::move(u));
      } else if (key == "bad_comment") {
        t.bad_comment_ids.insert(v.get<std::string>());
      } else if (key == "unsafe_commenter") {
        t.unsafe_commenters.insert(v.get<std::string>());
      } else if (key == "community") {
        t.community[v.at("user_id").get<std::string>()] = v.at("block").get<std::size_t>();
      } else if (key == "behavior_edge") {
        auto rel = parse_relation(v.at("relation").get<std::string>());
        if (!rel) fail("bad relation");
        t.behavior_edges.push_back({v.at("src").get<std::string>(), v.at("dst").get<std::string>(), *rel});
      } else {
        fail("unknown record key '" + key + "'");
      }
    } catch (const json::exception& e) {
      fail(e.what());
    }
  }
  if (!header) throw Error(ErrorKind::Parse, "synth", std::string(source_name) + ": missing header");
  return t;
}

PlantedGraph planted_partition_graph(const CommunityPlant& plant, std::uint64_t seed, double unsafe_fraction) {
  check_fraction(plant.p_in, "plant.p_in");
  check_fraction(plant.p_out, "plant.p_out");
  check_fraction(unsafe_fraction, "unsafe_fraction");
  if (plant.count == 0 || plant.size == 0) config_error("planted graph needs at least one nonempty block");
  PlantedGraph pg;
  Rng rng(seed);
  pg.unsafe_per_block.resize(plant.count);
  for (auto& n : pg.unsafe_per_block) {
    const double mean = unsafe_fraction * static_cast<double>(plant.size);
    n = static_cast<std::size_t>(std::clamp<std::int64_t>(
        std::llround(mean + rng.normal() * std::sqrt(mean)), 0, static_cast<std::int64_t>(plant.size)));
    if (unsafe_fraction == 0.0) n = 0;
  }
  for (std::size_t b = 0; b < plant.count; ++b) {
    for (std::size_t i = 0; i < plant.size; ++i) {
      pg.graph.add_node("b" + std::to_string(b) + "-n" + std::to_string(i), NodeKind::Uploader,
                        i < pg.unsafe_per_block[b] ? Safety::Unsafe : Safety::Safe);
      pg.membership.push_back(b);
    }
  }
  planted_pairs(plant, rng, [&](std::size_t a, std::size_t b) { pg.graph.add_edge(a, b, Relation::Subscribe); });
  return pg;
}

}  // namespace safewatch

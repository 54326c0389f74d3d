#include "fatiguescope/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fatiguescope/error.hpp"
#include "fatiguescope/ingestion.hpp"

namespace fatiguescope::cohort {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string num_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Most frequent key; nullopt when the top count is shared.
template <typename K>
std::optional<K> strict_mode(const std::map<K, std::size_t>& votes) {
  std::optional<K> best;
  std::size_t best_count = 0;
  bool tied = false;
  for (const auto& [k, c] : votes) {
    if (c > best_count) {
      best = k;
      best_count = c;
      tied = false;
    } else if (c == best_count) {
      tied = true;
    }
  }
  if (tied) return std::nullopt;
  return best;
}

}  // namespace

UserIdentification identify_user_faces(const std::vector<DetectionRecord>& timeline) {
  if (timeline.empty()) throw Error(ErrorCategory::degenerate, "empty timeline");

  // Posts in first-appearance order, each with its largest face.
  std::vector<std::string> post_order;
  std::map<std::string, const DetectionRecord*> candidate;
  for (const auto& r : timeline) {
    const auto key = r.post_key();
    auto [it, inserted] = candidate.emplace(key, &r);
    if (inserted) {
      post_order.push_back(key);
      continue;
    }
    const auto* cur = it->second;
    if (r.bbox.area() > cur->bbox.area() ||
        (r.bbox.area() == cur->bbox.area() && r.bbox.width > cur->bbox.width)) {
      it->second = &r;
    }
  }

  UserIdentification out;
  out.posts = post_order.size();
  std::map<Gender, std::size_t> gender_votes;
  std::map<std::string, std::size_t> race_votes;
  for (const auto& key : post_order) {
    const auto& d = candidate[key]->demographics;
    ++gender_votes[d.gender];
    ++race_votes[d.race_label];
  }
  const auto gender = strict_mode(gender_votes);
  if (!gender) {
    out.ambiguous_dimension = "gender";
    return out;
  }
  const auto race = strict_mode(race_votes);
  if (!race) {
    out.ambiguous_dimension = "race";
    return out;
  }

  UserProfile p;
  p.user_id = timeline.front().user_id;
  p.modal_gender = *gender;
  p.modal_race_label = *race;
  p.modal_race = parse_race(*race);
  std::map<int, std::size_t> age_votes;
  for (const auto& key : post_order) {
    const auto* r = candidate[key];
    if (r->demographics.gender == *gender && r->demographics.race_label == *race) {
      p.face_ids.push_back(r->face_id);
      ++age_votes[age_bucket(r->demographics.age)];
    } else {
      ++out.candidates_rejected;
    }
  }
  // Younger bucket wins a tie.
  int best = age_votes.begin()->first;
  for (const auto& [b, c] : age_votes) {
    if (c > age_votes[best]) best = b;
  }
  p.modal_age_bucket = best;
  out.profile = std::move(p);
  return out;
}

WeekdayFatigue weekday_aggregate(const UserProfile& profile,
                                 const std::map<std::string, double>& rates,
                                 const std::map<std::string, std::int64_t>& timestamps) {
  WeekdayFatigue wf;
  wf.user_id = profile.user_id;
  std::array<double, 7> sums{};
  for (const auto& id : profile.face_ids) {
    const auto rate = rates.find(id);
    if (rate == rates.end()) {
      throw Error(ErrorCategory::input_mismatch, "no fatigue rate for user face " + id);
    }
    const auto ts = timestamps.find(id);
    if (ts == timestamps.end()) {
      throw Error(ErrorCategory::input_mismatch, "no timestamp for user face " + id);
    }
    const int day = utc_weekday(ts->second);
    sums[day] += rate->second;
    ++wf.count[day];
  }
  for (int d = 0; d < 7; ++d) {
    if (wf.count[d] > 0) wf.mean[d] = sums[d] / static_cast<double>(wf.count[d]);
  }
  return wf;
}

PairwiseResult pairwise_group_comparison(const std::vector<LabeledSample>& groups, double alpha) {
  PairwiseResult out;
  std::vector<const LabeledSample*> usable;
  for (const auto& g : groups) {
    if (g.values.size() < 2) {
      out.skipped.push_back(g.label + ": fewer than 2 samples");
    } else {
      usable.push_back(&g);
    }
  }
  const std::size_t pairs = usable.size() * (usable.size() - (usable.empty() ? 0 : 1)) / 2;
  const double adjusted = pairs > 0 ? alpha / static_cast<double>(pairs) : alpha;
  for (std::size_t i = 0; i < usable.size(); ++i) {
    for (std::size_t j = i + 1; j < usable.size(); ++j) {
      try {
        PairwiseComparison c;
        c.result = stats::welch_ttest(usable[i]->values, usable[j]->values, alpha);
        c.result.label_a = usable[i]->label;
        c.result.label_b = usable[j]->label;
        c.bonferroni_alpha = adjusted;
        c.significant_raw = c.result.p_value < alpha;
        c.significant_adjusted = c.result.p_value < adjusted;
        out.comparisons.push_back(std::move(c));
      } catch (const Error& e) {
        if (e.category() != ErrorCategory::degenerate) throw;
        out.skipped.push_back(usable[i]->label + " vs " + usable[j]->label + ": " + e.what());
      }
    }
  }
  return out;
}

std::string GroupKey::label() const {
  std::string s;
  auto add = [&s](const std::string& part) {
    if (!s.empty()) s += '|';
    s += part;
  };
  if (age_bucket) add("age=" + age_bucket_label(*age_bucket));
  if (gender) add("gender=" + std::string(to_string(*gender)));
  if (race) add("race=" + std::string(to_string(*race)));
  if (weekday) add("weekday=" + std::string(kWeekdayNames[*weekday]));
  return s.empty() ? "all" : s;
}

GroupKey GroupKey::demographic() const {
  GroupKey k = *this;
  k.weekday.reset();
  return k;
}

CohortReport cohort_report(const ingestion::TimelineCorpus& corpus,
                           const std::map<std::string, double>& rates, const GroupingSpec& spec) {
  if (corpus.users.empty()) throw Error(ErrorCategory::degenerate, "cohort report of an empty corpus");

  CohortReport rep;
  rep.spec = spec;
  rep.users_total = corpus.users.size();
  std::map<GroupKey, std::vector<double>> samples;
  std::array<std::size_t, 100> bins{};

  for (const auto& [user, recs] : corpus.users) {
    const auto ident = identify_user_faces(recs);
    if (!ident.profile) {
      ++rep.users_ambiguous;
      continue;
    }
    const auto& p = *ident.profile;
    if (spec.by_race && !p.modal_race) {
      ++rep.users_unknown_race;
      continue;
    }
    std::map<std::string, std::int64_t> timestamps;
    for (const auto& r : recs) timestamps.emplace(r.face_id, r.post_timestamp);
    const auto wf = weekday_aggregate(p, rates, timestamps);

    GroupKey key;
    if (spec.by_age) key.age_bucket = p.modal_age_bucket;
    if (spec.by_gender) key.gender = p.modal_gender;
    if (spec.by_race) key.race = p.modal_race;

    double total = 0.0;
    for (const auto& id : p.face_ids) {
      const double rate = rates.at(id);
      total += rate;
      const int bin = std::clamp(static_cast<int>(std::floor(rate)), 0, 99);
      ++bins[bin];
      ++rep.histogram_total;
    }
    if (spec.by_weekday) {
      for (int d = 0; d < 7; ++d) {
        if (!wf.mean[d]) continue;
        GroupKey k = key;
        k.weekday = d;
        samples[k].push_back(*wf.mean[d]);
      }
    } else {
      samples[key].push_back(total / static_cast<double>(p.face_ids.size()));
    }
  }

  for (auto& [key, values] : samples) {
    GroupSummary g;
    g.key = key;
    g.users = values.size();
    g.mean = stats::mean(values);
    g.sd = stats::sample_sd(values);
    g.values = std::move(values);
    (g.users >= spec.min_group_size ? rep.groups : rep.excluded).push_back(std::move(g));
  }
  for (int b = 0; b < 100; ++b) {
    rep.histogram[b] = rep.histogram_total
                           ? static_cast<double>(bins[b]) / static_cast<double>(rep.histogram_total)
                           : 0.0;
  }

  // Comparison families: one per weekday (or a single family).
  std::map<std::optional<int>, std::vector<LabeledSample>> families;
  for (const auto& g : rep.groups) {
    families[g.key.weekday].push_back({g.key.demographic().label(), g.values});
  }
  for (const auto& [day, family] : families) {
    auto res = pairwise_group_comparison(family, spec.alpha);
    const std::string slice = day ? std::string(kWeekdayNames[*day]) : "all";
    for (auto& c : res.comparisons) {
      rep.comparisons.comparisons.push_back(std::move(c));
      rep.comparison_slices.push_back(slice);
    }
    for (auto& s : res.skipped) rep.comparisons.skipped.push_back(slice + ": " + s);
  }
  return rep;
}

namespace {

void key_columns(std::ostringstream& os, const GroupKey& k) {
  os << (k.age_bucket ? age_bucket_label(*k.age_bucket) : "all") << ','
     << (k.gender ? std::string(to_string(*k.gender)) : "all") << ','
     << (k.race ? std::string(to_string(*k.race)) : "all") << ','
     << (k.weekday ? std::string(kWeekdayNames[*k.weekday]) : "all");
}

}  // namespace

std::string CohortReport::means_csv() const {
  std::ostringstream os;
  os << "age_bucket,gender,race,weekday,users,mean,sd\n";
  for (const auto& g : groups) {
    key_columns(os, g.key);
    os << ',' << g.users << ',' << num(g.mean) << ',' << num(g.sd) << '\n';
  }
  return os.str();
}

std::string CohortReport::excluded_csv() const {
  std::ostringstream os;
  os << "age_bucket,gender,race,weekday,users,mean,reason\n";
  for (const auto& g : excluded) {
    key_columns(os, g.key);
    os << ',' << g.users << ',' << num(g.mean) << ",users below " << spec.min_group_size << '\n';
  }
  return os.str();
}

std::string CohortReport::comparisons_csv() const {
  std::ostringstream os;
  os << "weekday,group_a,group_b,n_a,n_b,mean_a,mean_b,difference,ci_low,ci_high,t,df,p_value,"
        "bonferroni_alpha,significant_raw,significant_adjusted\n";
  for (std::size_t i = 0; i < comparisons.comparisons.size(); ++i) {
    const auto& c = comparisons.comparisons[i];
    const auto& r = c.result;
    os << comparison_slices[i] << ',' << r.label_a << ',' << r.label_b << ',' << r.n_a << ','
       << r.n_b << ',' << num(r.mean_a) << ',' << num(r.mean_b) << ',' << num(r.difference) << ','
       << num(r.ci_low) << ',' << num(r.ci_high) << ',' << num(r.t) << ',' << num(r.df) << ','
       << num_g(r.p_value) << ',' << num_g(c.bonferroni_alpha) << ','
       << (c.significant_raw ? 1 : 0) << ',' << (c.significant_adjusted ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string CohortReport::histogram_csv() const {
  std::ostringstream os;
  os << "bin_low,bin_high,fraction\n";
  for (int b = 0; b < 100; ++b) {
    os << b << ',' << b + 1 << ',' << num(histogram[b]) << '\n';
  }
  return os.str();
}

}  // namespace fatiguescope::cohort

#include "dualpath/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dualpath/error.hpp"
#include "dualpath/geometry.hpp"
#include "dualpath/parallel.hpp"
#include "dualpath/quadrature.hpp"
#include "dualpath/rng.hpp"

namespace dualpath {

const char* to_string(BlockageMode mode) {
  return mode == BlockageMode::geometric ? "geometric" : "probabilistic";
}

const char* to_string(AssociationRule rule) {
  switch (rule) {
    case AssociationRule::table1: return "table1";
    case AssociationRule::argmax_no_fading: return "argmax";
    case AssociationRule::argmax_with_fading: return "argmax_fading";
    case AssociationRule::nearest_k: return "nearest_k";
  }
  return "unknown";
}

std::optional<BlockageMode> parse_blockage_mode(std::string_view text) {
  if (text == "geometric") return BlockageMode::geometric;
  if (text == "probabilistic") return BlockageMode::probabilistic;
  return std::nullopt;
}

std::optional<AssociationRule> parse_association_rule(std::string_view text) {
  if (text == "table1") return AssociationRule::table1;
  if (text == "argmax" || text == "argmax_no_fading") return AssociationRule::argmax_no_fading;
  if (text == "argmax_fading" || text == "argmax_with_fading")
    return AssociationRule::argmax_with_fading;
  if (text == "nearest_k") return AssociationRule::nearest_k;
  return std::nullopt;
}

double default_region_radius(const NetworkParams& params) {
  if (!(params.lambda_b > 0.0)) throw ParameterError("region radius needs lambda_b > 0");
  return 8.0 / std::sqrt(kPi * params.lambda_b);
}

void TrialConfig::validate() const {
  params.validate();
  if (params.lambda_b == 0.0) throw DomainError("simulation needs lambda_b > 0");
  if (trials < 1) throw ParameterError("trials must be >= 1");
  if (k_track < 1) throw ParameterError("k_track must be >= 1");
  if (forced_k < 1) throw ParameterError("forced_k must be >= 1");
  if (!(region_radius >= 0.0) || !std::isfinite(region_radius))
    throw ParameterError("region_radius must be finite and >= 0");
}

double TrialConfig::effective_region_radius() const {
  return region_radius > 0.0 ? region_radius : default_region_radius(params);
}

namespace {

constexpr std::size_t kTrialBlock = 1024;
constexpr std::size_t kDrawBlock = 4096;
constexpr std::uint32_t kMaxResamples = 10'000;
constexpr double kZ95 = 1.959963984540054;

struct Link {
  double r = 0.0;
  double theta = 0.0;
  bool los = false;
  bool far = false;
  double log_gain = 0.0;  // -alpha log r
};

// LoS probability of one link; uniform rectangle orientations average the
// blocking count over the orientation first.
double link_los_probability(const NetworkParams& p, bool random_orientation, double r,
                            double theta) {
  if (!random_orientation) return los_probability(r, theta, p);
  const double mean_proj = 2.0 * (p.length + p.width) / kPi;
  return std::exp(-p.lambda_c * (p.width * p.length + r * mean_proj));
}

// LoS BSs beyond the sampling disc, drawn by thinning a PPP of intensity
// lambda_b exp(-lambda_c (w l + min(l, w) r)), which dominates the LoS law.
void append_far_los(const NetworkParams& p, bool random_orientation, double radius,
                    RngStream& rng, std::vector<Link>& out) {
  if (p.lambda_c == 0.0) return;
  const double beta = p.lambda_c * p.min_side();
  const double log_bound0 = -p.lambda_c * p.width * p.length;
  const double mean = kTwoPi * p.lambda_b * std::exp(log_bound0 - beta * radius) *
                      (radius / beta + 1.0 / (beta * beta));
  if (!(mean > 0.0)) return;
  const std::uint64_t n = poisson_count(rng, mean);
  // Radial density proportional to (R + x) exp(-beta x): Exp(beta) with weight
  // R beta / (R beta + 1), else Gamma(2, beta).
  const double w_exp = radius * beta / (radius * beta + 1.0);
  const std::size_t first = out.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    double x = unit_exponential(rng) / beta;
    if (uniform01(rng) >= w_exp) x += unit_exponential(rng) / beta;
    const double r = radius + x;
    const double theta = kTwoPi * uniform01(rng);
    const double accept =
        link_los_probability(p, random_orientation, r, theta) / std::exp(log_bound0 - beta * r);
    if (uniform01(rng) < accept) out.push_back({r, theta, true, true, 0.0});
  }
  std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
            [](const Link& a, const Link& b) { return a.r < b.r; });
}

void assign_gains(const NetworkParams& p, std::vector<Link>& links) {
  for (Link& l : links)
    l.log_gain = -(l.los ? p.alpha_los : p.alpha_nlos) * std::log(l.r);
}

std::vector<Link> sample_links(const TrialConfig& cfg, double radius, RngStream& rng,
                               std::size_t min_links, std::uint32_t& resamples) {
  const NetworkParams& p = cfg.params;
  std::vector<PointPolar> bs;
  for (;;) {
    bs = sample_bs_ppp(p.lambda_b, radius, rng);
    if (bs.size() >= min_links) break;
    if (++resamples > kMaxResamples)
      throw DomainError("region too small: realizations keep holding too few BSs");
  }

  std::vector<Link> links(bs.size());
  for (std::size_t i = 0; i < bs.size(); ++i) links[i] = {bs[i].r, bs[i].theta, true, false, 0.0};

  if (p.lambda_c > 0.0) {
    if (cfg.blockage_mode == BlockageMode::probabilistic) {
      for (Link& l : links)
        l.los = uniform01(rng) < link_los_probability(p, cfg.random_orientation, l.r, l.theta);
    } else {
      std::vector<Point2> ends(bs.size());
      for (std::size_t i = 0; i < bs.size(); ++i) ends[i] = bs[i].cartesian();
      const std::vector<bool> los =
          sample_shared_los({0.0, 0.0}, ends, p.lambda_c, p.length, p.width, p.orientation, rng,
                            cfg.random_orientation);
      for (std::size_t i = 0; i < links.size(); ++i) links[i].los = los[i];
    }
  }
  if (cfg.blockage_mode == BlockageMode::probabilistic)
    append_far_los(p, cfg.random_orientation, radius, rng, links);
  assign_gains(p, links);
  return links;
}

// 0-based first local maximum; global maximum when none (fallback).
std::size_t table1_index(std::span<const double> log_gain, bool& fallback) {
  for (std::size_t i = 0; i + 1 < log_gain.size(); ++i)
    if (log_gain[i] >= log_gain[i + 1]) {
      fallback = false;
      return i;
    }
  fallback = true;
  return static_cast<std::size_t>(
      std::max_element(log_gain.begin(), log_gain.end()) - log_gain.begin());
}

std::size_t argmax_index(std::span<const double> score) {
  return static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
}

SirSample trial_impl(const TrialConfig& cfg, double radius, std::size_t index,
                     std::vector<Link>* links_out) {
  RngStream rng = make_stream(cfg.master_seed, index);
  SirSample out;
  const bool forced = cfg.association == AssociationRule::nearest_k;
  const std::size_t min_links = forced ? static_cast<std::size_t>(cfg.forced_k) + 1 : 2;
  std::vector<Link> links = sample_links(cfg, radius, rng, min_links, out.resamples);
  const std::size_t n = links.size();

  std::vector<double> fading(n);
  for (double& h : fading) h = unit_exponential(rng);
  std::vector<double> log_gain(n);
  for (std::size_t i = 0; i < n; ++i) log_gain[i] = links[i].log_gain;

  const std::size_t t1 = table1_index(log_gain, out.fallback);
  const std::size_t am = argmax_index(log_gain);
  out.table1_k = static_cast<int>(t1) + 1;
  out.argmax_k = static_cast<int>(am) + 1;

  std::size_t serving = t1;
  switch (cfg.association) {
    case AssociationRule::table1: serving = t1; break;
    case AssociationRule::argmax_no_fading: serving = am; break;
    case AssociationRule::argmax_with_fading: {
      std::vector<double> score(n);
      for (std::size_t i = 0; i < n; ++i) score[i] = log_gain[i] + std::log(fading[i]);
      serving = argmax_index(score);
      break;
    }
    case AssociationRule::nearest_k: serving = static_cast<std::size_t>(cfg.forced_k) - 1; break;
  }

  // Powers relative to the serving path gain.
  double interference = 0.0;
  for (std::size_t j = forced ? serving + 1 : 0; j < n; ++j) {
    if (j == serving) continue;
    interference += fading[j] * std::exp(log_gain[j] - log_gain[serving]);
  }
  out.sir_linear = fading[serving] / interference;
  out.serving_k = static_cast<int>(serving) + 1;
  const Link& s = links[serving];
  out.serving_state = {s.los ? LinkKind::los : LinkKind::nlos,
                       s.los ? cfg.params.alpha_los : cfg.params.alpha_nlos,
                       std::exp(log_gain[serving])};
  if (links_out) *links_out = std::move(links);
  return out;
}

struct Partial {
  std::vector<std::uint64_t> covered;
  std::vector<std::uint64_t> covered_tracked;
  std::uint64_t tracked = 0;
  std::vector<std::uint64_t> assoc;
  double rate_sum = 0.0;
  double rate_sq = 0.0;
  std::uint64_t disagree = 0;
  std::uint64_t serving_los = 0;
  std::uint64_t resamples = 0;
  std::uint64_t fallbacks = 0;
  std::vector<std::uint64_t> bin_links;
  std::vector<std::uint64_t> bin_los;
};

double predicted_bin_los(const TrialConfig& cfg, double lo, double hi) {
  const NetworkParams& p = cfg.params;
  auto f = [&](double r) {
    const double los = cfg.random_orientation ? link_los_probability(p, true, r, 0.0)
                                              : mean_los_probability(r, p);
    return los * 2.0 * r;
  };
  return integrate_finite(f, lo, hi, {1e-10, 1e-10, 100'000}).value / (hi * hi - lo * lo);
}

}  // namespace

int associate_table1(std::span<const LinkPower> links, bool* fallback) {
  if (links.empty()) throw ParameterError("association needs at least one link");
  std::vector<double> lg(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (!(links[i].r > 0.0)) throw DomainError("link distance must be > 0");
    lg[i] = -links[i].alpha * std::log(links[i].r);
  }
  bool fb = false;
  const std::size_t k = table1_index(lg, fb);
  if (fallback) *fallback = fb;
  return static_cast<int>(k) + 1;
}

int associate_argmax(std::span<const LinkPower> links, std::span<const double> fading) {
  if (links.empty()) throw ParameterError("association needs at least one link");
  if (!fading.empty() && fading.size() != links.size())
    throw ParameterError("fading must match the link count");
  std::vector<double> score(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (!(links[i].r > 0.0)) throw DomainError("link distance must be > 0");
    score[i] = -links[i].alpha * std::log(links[i].r);
    if (!fading.empty()) score[i] += std::log(fading[i]);
  }
  return static_cast<int>(argmax_index(score)) + 1;
}

SirSample run_trial(const TrialConfig& cfg, std::size_t trial_index) {
  cfg.validate();
  if (trial_index >= cfg.trials) throw ParameterError("trial_index must be < trials");
  return trial_impl(cfg, cfg.effective_region_radius(), trial_index, nullptr);
}

SimulationSummary simulate(const TrialConfig& cfg, std::span<const double> thresholds) {
  cfg.validate();
  for (double t : thresholds)
    if (!(t >= 0.0)) throw ParameterError("thresholds must be >= 0");
  const double radius = cfg.effective_region_radius();
  const std::size_t n_thr = thresholds.size();
  const std::size_t n_assoc = static_cast<std::size_t>(cfg.k_track) + 1;
  const std::size_t blocks = (cfg.trials + kTrialBlock - 1) / kTrialBlock;

  std::vector<Partial> partial(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    Partial acc;
    acc.covered.assign(n_thr, 0);
    acc.covered_tracked.assign(n_thr, 0);
    acc.assoc.assign(n_assoc, 0);
    acc.bin_links.assign(kRadialBins, 0);
    acc.bin_los.assign(kRadialBins, 0);
    std::vector<Link> links;
    const std::size_t end = std::min(cfg.trials, (b + 1) * kTrialBlock);
    for (std::size_t i = b * kTrialBlock; i < end; ++i) {
      const SirSample s = trial_impl(cfg, radius, i, &links);
      const bool tracked = s.serving_k <= cfg.k_track;
      for (std::size_t t = 0; t < n_thr; ++t) {
        if (s.sir_linear > thresholds[t]) {
          ++acc.covered[t];
          if (tracked) ++acc.covered_tracked[t];
        }
      }
      if (tracked) ++acc.tracked;
      ++acc.assoc[tracked ? static_cast<std::size_t>(s.serving_k) - 1 : n_assoc - 1];
      const double rate = std::log1p(s.sir_linear) / std::numbers::ln2;
      acc.rate_sum += rate;
      acc.rate_sq += rate * rate;
      if (s.table1_k != s.argmax_k) ++acc.disagree;
      if (s.serving_state.kind == LinkKind::los) ++acc.serving_los;
      acc.resamples += s.resamples;
      if (s.fallback) ++acc.fallbacks;
      for (const Link& l : links) {
        if (l.far) continue;
        const auto bin = std::min<std::size_t>(kRadialBins - 1,
                                               static_cast<std::size_t>(l.r / radius * kRadialBins));
        ++acc.bin_links[bin];
        if (l.los) ++acc.bin_los[bin];
      }
    }
    partial[b] = std::move(acc);
  });

  Partial tot;
  tot.covered.assign(n_thr, 0);
  tot.covered_tracked.assign(n_thr, 0);
  tot.assoc.assign(n_assoc, 0);
  tot.bin_links.assign(kRadialBins, 0);
  tot.bin_los.assign(kRadialBins, 0);
  for (const Partial& p : partial) {
    for (std::size_t t = 0; t < n_thr; ++t) {
      tot.covered[t] += p.covered[t];
      tot.covered_tracked[t] += p.covered_tracked[t];
    }
    tot.tracked += p.tracked;
    for (std::size_t k = 0; k < n_assoc; ++k) tot.assoc[k] += p.assoc[k];
    tot.rate_sum += p.rate_sum;
    tot.rate_sq += p.rate_sq;
    tot.disagree += p.disagree;
    tot.serving_los += p.serving_los;
    tot.resamples += p.resamples;
    tot.fallbacks += p.fallbacks;
    for (int k = 0; k < kRadialBins; ++k) {
      tot.bin_links[k] += p.bin_links[k];
      tot.bin_los[k] += p.bin_los[k];
    }
  }

  const double n = static_cast<double>(cfg.trials);
  auto binomial = [](std::uint64_t hits, std::uint64_t count) -> Estimate {
    if (count == 0) return {0.0, 0.0};
    const double m = static_cast<double>(count);
    const double f = static_cast<double>(hits) / m;
    return {f, kZ95 * std::sqrt(f * (1.0 - f) / m)};
  };

  SimulationSummary out;
  out.trials = cfg.trials;
  out.thresholds.assign(thresholds.begin(), thresholds.end());
  for (std::size_t t = 0; t < n_thr; ++t) {
    out.coverage.push_back(binomial(tot.covered[t], cfg.trials));
    out.coverage_tracked.push_back(binomial(tot.covered_tracked[t], tot.tracked));
  }
  const double mean = tot.rate_sum / n;
  const double var = cfg.trials > 1 ? std::max(0.0, (tot.rate_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  out.mean_rate = {mean, kZ95 * std::sqrt(var / n)};
  for (std::size_t k = 0; k < n_assoc; ++k) {
    const Estimate e = binomial(tot.assoc[k], cfg.trials);
    out.association_hist.push_back(e.value);
    out.association_std_errors.push_back(e.half_width / kZ95);
  }
  out.disagreement_rate = static_cast<double>(tot.disagree) / n;
  out.serving_los_fraction = static_cast<double>(tot.serving_los) / n;
  for (int k = 0; k < kRadialBins; ++k) {
    RadialLosBin bin;
    bin.r_lo = radius * k / kRadialBins;
    bin.r_hi = radius * (k + 1) / kRadialBins;
    bin.links = tot.bin_links[k];
    const Estimate e = binomial(tot.bin_los[k], tot.bin_links[k]);
    bin.los_frequency = e.value;
    bin.half_width = e.half_width;
    bin.predicted = predicted_bin_los(cfg, bin.r_lo, bin.r_hi);
    out.los_by_bin.push_back(bin);
  }
  out.resamples = tot.resamples;
  out.fallbacks = tot.fallbacks;
  return out;
}

Estimate estimate_coverage(const TrialConfig& cfg, double threshold) {
  const double t[] = {threshold};
  return simulate(cfg, t).coverage.front();
}

Estimate estimate_rate(const TrialConfig& cfg) { return simulate(cfg, {}).mean_rate; }

std::vector<double> estimate_association(const TrialConfig& cfg) {
  return simulate(cfg, {}).association_hist;
}

LinkLosEstimate estimate_link_los(const NetworkParams& params, double r, double theta,
                                  std::size_t draws, std::uint64_t seed) {
  params.validate();
  if (!(r > 0.0) || !std::isfinite(r)) throw ParameterError("link distance must be > 0");
  if (draws < 2) throw ParameterError("need >= 2 draws");
  const Point2 end = PointPolar{r, theta}.cartesian();
  const std::size_t blocks = (draws + kDrawBlock - 1) / kDrawBlock;
  struct Acc {
    std::uint64_t los = 0;
    double count = 0.0;
    double count_sq = 0.0;
  };
  std::vector<Acc> partial(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    RngStream rng = make_stream(seed, b);
    Acc acc;
    const std::size_t end_i = std::min(draws, (b + 1) * kDrawBlock);
    for (std::size_t i = b * kDrawBlock; i < end_i; ++i) {
      const auto rects = sample_blockages_near_segment({0.0, 0.0}, end, params.lambda_c,
                                                       params.length, params.width,
                                                       params.orientation, rng);
      const auto c = static_cast<double>(count_blocking({0.0, 0.0}, end, rects));
      if (c == 0.0) ++acc.los;
      acc.count += c;
      acc.count_sq += c * c;
    }
    partial[b] = acc;
  });
  Acc tot;
  for (const Acc& a : partial) {
    tot.los += a.los;
    tot.count += a.count;
    tot.count_sq += a.count_sq;
  }
  const double n = static_cast<double>(draws);
  LinkLosEstimate out;
  out.draws = draws;
  out.los_frequency = static_cast<double>(tot.los) / n;
  out.los_std_error = std::sqrt(out.los_frequency * (1.0 - out.los_frequency) / n);
  out.mean_count = tot.count / n;
  const double var = std::max(0.0, (tot.count_sq - n * out.mean_count * out.mean_count) / (n - 1.0));
  out.count_std_error = std::sqrt(var / n);
  out.expected_count = expected_blockage_count(r, theta, params);
  out.expected_los = los_probability(r, theta, params);
  return out;
}

LaplaceMcEstimate estimate_laplace_mc(const NetworkParams& params, double s, double r_k,
                                      std::size_t trials, std::uint64_t seed,
                                      LaplaceMcMethod method) {
  params.validate();
  if (!(s >= 0.0) || !std::isfinite(s)) throw ParameterError("s must be >= 0");
  if (!(r_k > 0.0) || !std::isfinite(r_k)) throw ParameterError("r_k must be > 0");
  if (trials < 2) throw ParameterError("need >= 2 trials");
  if (params.lambda_b == 0.0) return {1.0, 0.0, trials};
  const double radius = std::max(default_region_radius(params), 20.0 * r_k);
  const double area_mean = kPi * params.lambda_b * (radius * radius - r_k * r_k);
  const std::size_t blocks = (trials + kDrawBlock - 1) / kDrawBlock;
  struct Acc {
    double sum = 0.0;
    double sq = 0.0;
  };
  std::vector<Acc> partial(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    Acc acc;
    std::vector<Link> links;
    const std::size_t end_i = std::min(trials, (b + 1) * kDrawBlock);
    for (std::size_t i = b * kDrawBlock; i < end_i; ++i) {
      RngStream rng = make_stream(seed, i);
      links.clear();
      const std::uint64_t n = poisson_count(rng, area_mean);
      double d = 0.0;
      if (method == LaplaceMcMethod::full) {
        for (std::uint64_t j = 0; j < n; ++j) {
          const double r = std::sqrt(r_k * r_k + uniform01(rng) * (radius * radius - r_k * r_k));
          const double theta = kTwoPi * uniform01(rng);
          const bool los = params.lambda_c == 0.0 ||
                           uniform01(rng) < los_probability(r, theta, params);
          links.push_back({r, theta, los, false, 0.0});
        }
        append_far_los(params, false, radius, rng, links);
        assign_gains(params, links);
        double interference = 0.0;
        for (const Link& l : links) interference += unit_exponential(rng) * std::exp(l.log_gain);
        // 1 - exp(-s I) keeps the variance resolvable when the value is near 1.
        d = -std::expm1(-s * interference);
      } else {
        // log prod_i [q_i / (1 + s r_i^-aL) + (1 - q_i) / (1 + s r_i^-aN)]
        double log_prod = 0.0;
        for (std::uint64_t j = 0; j < n; ++j) {
          const double r = std::sqrt(r_k * r_k + uniform01(rng) * (radius * radius - r_k * r_k));
          const double theta = kTwoPi * uniform01(rng);
          const double q = los_probability(r, theta, params);
          const double x_l = s * std::pow(r, -params.alpha_los);
          const double x_n = s * std::pow(r, -params.alpha_nlos);
          // 1 - E[...] = q x_l / (1 + x_l) + (1 - q) x_n / (1 + x_n)
          log_prod += std::log1p(-(q * x_l / (1.0 + x_l) + (1.0 - q) * x_n / (1.0 + x_n)));
        }
        // Far LoS points beyond the disc arrive with their state already drawn.
        append_far_los(params, false, radius, rng, links);
        for (const Link& l : links) log_prod -= std::log1p(s * std::pow(l.r, -params.alpha_los));
        d = -std::expm1(log_prod);
      }
      acc.sum += d;
      acc.sq += d * d;
    }
    partial[b] = acc;
  });
  Acc tot;
  for (const Acc& a : partial) {
    tot.sum += a.sum;
    tot.sq += a.sq;
  }
  const double n = static_cast<double>(trials);
  LaplaceMcEstimate out;
  out.trials = trials;
  const double mean = tot.sum / n;
  out.value = 1.0 - mean;
  const double var = std::max(0.0, (tot.sq - n * mean * mean) / (n - 1.0));
  out.std_error = std::sqrt(var / n);
  return out;
}

}  // namespace dualpath

#include "fedgala/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <optional>
#include <thread>

#include "fedgala/errors.hpp"
#include "fedgala/global_alignment.hpp"
#include "fedgala/io.hpp"
#include "fedgala/local_alignment.hpp"
#include "fedgala/theory.hpp"

namespace fedgala {

namespace {

namespace theory_tag {
constexpr std::uint64_t kLemma1 = 101;
constexpr std::uint64_t kLemma2 = 102;
constexpr std::uint64_t kProposition = 103;
constexpr std::uint64_t kClaim = 104;
}  // namespace theory_tag

bool uses_aligned_aggregation(Algorithm a) {
  return a != Algorithm::FedAvgSsl && a != Algorithm::LocalOnly;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions are
/// rethrown in index order so the reported failure does not depend on timing.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto body = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min(std::max<std::size_t>(jobs, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w)
      threads.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) body(i);
      });
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ClientRoundRecord to_record(std::size_t id, const LocalRoundResult& r) {
  ClientRoundRecord rec;
  rec.client_id = id;
  rec.considered = r.stats.considered;
  rec.discarded = r.stats.discarded;
  rec.discard_ratio = r.stats.ratio();
  rec.mean_loss = r.mean_loss;
  rec.steps = r.steps;
  return rec;
}

double pooled_discard_ratio(const std::vector<RoundRecord>& records) {
  std::size_t considered = 0, discarded = 0;
  for (const auto& r : records)
    for (const auto& c : r.clients) {
      considered += c.considered;
      discarded += c.discarded;
    }
  return considered == 0 ? 0.0 : static_cast<double>(discarded) / static_cast<double>(considered);
}

}  // namespace

double RoundRecord::discard_ratio() const noexcept {
  std::size_t considered = 0, discarded = 0;
  for (const auto& c : clients) {
    considered += c.considered;
    discarded += c.discarded;
  }
  return considered == 0 ? 0.0 : static_cast<double>(discarded) / static_cast<double>(considered);
}

ProtocolResult run_protocol(const ExperimentConfig& config, const ClientData& clients,
                            std::size_t jobs) {
  if (clients.empty()) throw PreconditionError("run_protocol: no clients");
  for (const auto& c : clients)
    if (!c) throw PreconditionError("run_protocol: client without data");
  const std::size_t k = clients.size();
  const std::size_t features = clients.front()->data.cols();
  const RngStream base{config.seed, 0};
  const LocalRoundOptions options = config.local_options();
  const bool local_only = config.algorithm == Algorithm::LocalOnly;

  ProtocolResult result;
  result.initial = init_encoder(options.encoder, features, base.derive(stream_tag::kInit));
  LayeredParams global = result.initial;
  std::optional<LayeredParams> previous;
  std::vector<LayeredParams> local_models(local_only ? k : 0, result.initial);

  RealVec size_weights;
  if (config.size_weighted_fedavg) {
    double total = 0.0;
    for (const auto& c : clients) total += static_cast<double>(c->data.rows());
    for (const auto& c : clients) size_weights.push_back(static_cast<double>(c->data.rows()) / total);
  }

  for (std::size_t t = 1; t <= config.rounds; ++t) {
    const AffineAug aug = sample_augmentation(features, base.derive(stream_tag::kAugmentation, t));
    std::vector<LocalRoundResult> locals(k);
    try {
      parallel_for(k, jobs, [&](std::size_t i) {
        ClientState state{i, {}, clients[i], base.derive(stream_tag::kShuffle, i).derive(t),
                          config.learning_rate};
        const LayeredParams& start = local_only ? local_models[i] : global;
        const LayeredParams* prev = (!local_only && previous) ? &*previous : nullptr;
        locals[i] = local_round(std::move(state), start, prev, options, aug);
      });
    } catch (const NonFiniteError& e) {
      throw NonFiniteError("round " + std::to_string(t) + ": " + e.what());
    }

    RoundRecord record;
    record.round = t;
    for (std::size_t i = 0; i < k; ++i) record.clients.push_back(to_record(i, locals[i]));

    if (local_only) {
      for (std::size_t i = 0; i < k; ++i) local_models[i] = std::move(locals[i].params);
      record.global_param_norm = local_models.front().l2_norm();
    } else {
      std::vector<LayeredParams> params;
      params.reserve(k);
      for (auto& l : locals) params.push_back(std::move(l.params));
      const std::vector<UpdateDelta> updates = client_updates(params, global, t);
      UpdateDelta update;
      if (uses_aligned_aggregation(config.algorithm)) {
        AggregationReport report = aligned_aggregate(updates, config.agg_iterations);
        record.weight_history = std::move(report.weights_per_iteration);
        record.fallback_used = report.fallback_used;
        update = std::move(report.final_update);
      } else {
        update = fedavg_aggregate(updates, size_weights);
      }
      LayeredParams next = apply_global_update(global, update);
      if (!next.all_finite())
        throw NonFiniteError("round " + std::to_string(t) +
                             ": global model is not finite after aggregation (update norm " +
                             format_real(update.delta.l2_norm()) + ")");
      previous = std::move(global);
      global = std::move(next);
      record.global_param_norm = global.l2_norm();
    }
    result.records.push_back(std::move(record));
  }
  result.final_global = local_only ? local_models.front() : global;
  return result;
}

DomainFamily make_family(const ExperimentConfig& config) {
  const RngStream base{config.seed, 0};
  const std::size_t f = config.features;
  LabelRule rule;
  rule.weights = sample_standard_normal(base.derive(stream_tag::kLabelRule), f);
  rule.threshold = config.label_threshold;
  std::vector<DomainSpec> specs;
  for (std::size_t d = 0; d < config.domain_count; ++d) {
    const double centre = config.rho.size() == 1 ? config.rho[0] : config.rho[d];
    DomainSpec spec;
    spec.feature_count = f;
    spec.label_rule = rule;
    for (std::size_t j = 0; j < f; ++j) {
      // Features fan out linearly around the domain's centre value.
      const double offset =
          f > 1 ? config.rho_spread * (2.0 * static_cast<double>(j) / static_cast<double>(f - 1) - 1.0)
                : 0.0;
      spec.rho.push_back(std::clamp(centre + offset, 0.0, 1.0));
    }
    specs.push_back(std::move(spec));
  }
  return generate_family(specs, config.samples, base.derive(stream_tag::kFamily));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const DomainFamily& family,
                                std::size_t jobs) {
  config.validate();
  if (family.domains.size() != config.domain_count)
    throw DimensionError("run_experiment: family size differs from domains.count");
  ExperimentResult out;
  out.target_domain = config.resolved_target();
  for (std::size_t d = 0; d < family.domains.size() && out.training_domains.size() < config.clients;
       ++d)
    if (d != out.target_domain) out.training_domains.push_back(d);

  ClientData data;
  for (std::size_t d : out.training_domains)
    data.push_back(std::make_shared<const DomainSample>(family.domains[d]));
  out.protocol = run_protocol(config, data, jobs);

  const std::vector<int> labels = domain_labels(family, out.target_domain);
  const RngStream probe_stream =
      RngStream{config.seed, 0}.derive(stream_tag::kProbe, out.target_domain);
  const EncoderSpec encoder = config.resolved_encoder();
  for (std::size_t j = 0; j < config.labeled_fractions.size(); ++j) {
    ProbeOptions opts;
    opts.labeled_fraction = config.labeled_fractions[j];
    opts.epochs = config.probe_epochs;
    opts.learning_rate = config.probe_learning_rate;
    ProbeResult p = linear_probe(encoder, out.protocol.final_global,
                                 family.domains[out.target_domain], labels, opts,
                                 probe_stream.derive(0, j));
    p.seed = config.seed;
    out.probes.push_back(p);
  }
  return out;
}

std::vector<ExperimentResult> leave_one_domain_out(const ExperimentConfig& config,
                                                   std::size_t jobs) {
  const DomainFamily family = make_family(config);
  std::vector<ExperimentResult> results;
  for (std::size_t target = 0; target < config.domain_count; ++target) {
    ExperimentConfig c = config;
    c.clients = config.domain_count - 1;
    c.target_domain = target;
    results.push_back(run_experiment(c, family, jobs));
  }
  return results;
}

namespace {

void append_rows(std::vector<SweepRow>& rows, const ExperimentConfig& c, const ExperimentResult& r) {
  for (const auto& p : r.probes) {
    SweepRow row;
    row.tau = c.tau;
    row.local_epochs = c.local_epochs;
    row.rounds = c.rounds;
    row.agg_iterations = c.agg_iterations;
    row.batch_size = c.batch_size;
    row.mean_discard_ratio = pooled_discard_ratio(r.protocol.records);
    row.probe = p;
    rows.push_back(row);
  }
}

}  // namespace

std::vector<SweepRow> grid_sweep(const ExperimentConfig& config, std::size_t jobs) {
  const DomainFamily family = make_family(config);
  std::vector<SweepRow> rows;
  for (double tau : config.sweep.tau)
    for (std::size_t e : config.sweep.local_epochs)
      for (std::size_t it : config.sweep.agg_iterations)
        for (std::size_t b : config.sweep.batch_size) {
          ExperimentConfig c = config;
          c.tau = tau;
          c.local_epochs = e;
          c.agg_iterations = it;
          c.batch_size = b;
          append_rows(rows, c, run_experiment(c, family, jobs));
        }
  return rows;
}

std::vector<SweepRow> communication_frequency_sweep(const ExperimentConfig& config,
                                                    std::size_t total_local_epochs,
                                                    const std::vector<std::size_t>& e_values,
                                                    std::size_t jobs) {
  const DomainFamily family = make_family(config);
  std::vector<SweepRow> rows;
  for (std::size_t e : e_values) {
    if (e == 0) throw PreconditionError("communication_frequency_sweep: E must be >= 1");
    if (total_local_epochs % e != 0)
      log_warning("communication_frequency_sweep: " + std::to_string(total_local_epochs) +
                  " total epochs not divisible by E=" + std::to_string(e) + ", dropping " +
                  std::to_string(total_local_epochs % e));
    ExperimentConfig c = config;
    c.local_epochs = e;
    c.rounds = total_local_epochs / e;
    append_rows(rows, c, run_experiment(c, family, jobs));
  }
  return rows;
}

std::vector<Verdict> run_theory_suite(const ExperimentConfig& config,
                                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const RngStream base{config.seed, 0};
  std::vector<Verdict> verdicts;

  {
    const RealVec sigmas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const std::vector<std::size_t> counts{1, 4};
    const Lemma1Report rep =
        lemma1_vs_estimator(sigmas, counts, config.lemma1_samples, base.derive(theory_tag::kLemma1));
    CsvWriter csv(dir / "lemma1.csv", {"feature_count", "sigma", "closed_form", "estimated", "abs_error"});
    for (const auto& p : rep.points)
      csv.cell(p.feature_count).cell(p.sigma).cell(p.closed_form).cell(p.estimated)
          .cell(std::abs(p.closed_form - p.estimated)).end_row();
    verdicts.push_back({"lemma1_mi_agreement", rep.max_abs_error < 0.02, rep.max_abs_error, 0.02});
  }
  {
    const std::size_t f = config.theory.feature_count;
    const Lemma2Report rep = lemma2_linear_check(f, f, config.lemma2_draws, base.derive(theory_tag::kLemma2));
    CsvWriter csv(dir / "lemma2.csv", {"row", "col", "taylor", "empirical"});
    for (std::size_t r = 0; r < rep.taylor.rows(); ++r)
      for (std::size_t c = 0; c < rep.taylor.cols(); ++c)
        csv.cell(r).cell(c).cell(rep.taylor(r, c)).cell(rep.empirical(r, c)).end_row();
    verdicts.push_back({"lemma2_taylor_covariance", rep.relative_error < 0.02, rep.relative_error, 0.02});
  }
  {
    const std::vector<TrendPoint> points = assumption1_grid(config.cov_grid, config.theory);
    {
      CsvWriter csv(dir / "theorem1.csv",
                    {"domain_cov", "mutual_information", "grad_cov_summary", "var_diff_summary"});
      for (const auto& p : points)
        csv.cell(p.domain_cov).cell(p.mi).cell(p.grad_cov_summary).cell(p.var_diff).end_row();
    }
    {
      CsvWriter csv(dir / "theorem1_seeds.csv",
                    {"domain_cov", "seed", "grad_cov_summary", "var_diff_summary"});
      for (const auto& p : points)
        for (std::size_t s = 0; s < config.theory.seeds.size(); ++s)
          csv.cell(p.domain_cov).cell(static_cast<std::size_t>(config.theory.seeds[s]))
              .cell(p.per_seed_grad_cov[s]).cell(p.per_seed_var_diff[s]).end_row();
    }
    const TheoremTrend trend = theorem1_trend(points);
    const CorollaryResult cor = corollary1_trend(points);
    verdicts.push_back({"theorem1_trend", trend.spearman_rho_one_outlier >= 0.8,
                        trend.spearman_rho_one_outlier, 0.8});
    verdicts.push_back({"corollary1_trend", cor.spearman_rho <= -0.8, cor.spearman_rho, -0.8});
  }
  {
    CsvWriter csv(dir / "proposition1.csv", {"trial", "before", "after", "removed_index", "holds"});
    std::size_t holds = 0;
    for (std::size_t trial = 0; trial < config.proposition_trials; ++trial) {
      Rng rng(base.derive(theory_tag::kProposition, trial));
      const Proposition1Instance inst = random_proposition1_instance(rng);
      const Proposition1Result r = proposition1_check(inst.g_i, inst.g_j, inst.g_est);
      holds += r.holds ? 1 : 0;
      csv.cell(trial).cell(r.before).cell(r.after).cell(r.removed_index).cell(r.holds ? 1 : 0).end_row();
    }
    const double rate = config.proposition_trials == 0
                            ? 0.0
                            : static_cast<double>(holds) / static_cast<double>(config.proposition_trials);
    verdicts.push_back({"proposition1_holds_rate", rate >= 0.95, rate, 0.95});
    const Proposition1Instance c = constructed_proposition1_instance();
    const Proposition1Result r = proposition1_check(c.g_i, c.g_j, c.g_est);
    verdicts.push_back({"proposition1_constructed", r.holds, r.holds ? 1.0 : 0.0, 1.0});
  }
  {
    CsvWriter csv(dir / "claim1.csv", {"mode", "trial", "fraction", "degenerate"});
    const ClaimMode modes[] = {ClaimMode::SupervisedLogistic, ClaimMode::SslPositive,
                               ClaimMode::SslNegative};
    RealVec min_fraction(3, std::numeric_limits<double>::infinity());
    for (std::size_t m = 0; m < 3; ++m)
      for (std::size_t trial = 0; trial < config.claim_trials; ++trial) {
        const SignCheck s = claim1_sign_check(modes[m], base.derive(theory_tag::kClaim + 16 * m, trial),
                                              config.theory.feature_count);
        const double f = s.degenerate ? 0.0 : s.fraction;
        min_fraction[m] = std::min(min_fraction[m], f);
        csv.cell(to_string(modes[m])).cell(trial).cell(s.fraction).cell(s.degenerate ? 1 : 0).end_row();
      }
    for (double& v : min_fraction)
      if (!std::isfinite(v)) v = 0.0;
    // The negative-pair mode is reported in claim1.csv only; it carries no
    // guarantee.
    verdicts.push_back({"claim1_supervised_sign", min_fraction[0] >= 1.0, min_fraction[0], 1.0});
    verdicts.push_back({"claim1_ssl_positive_sign", min_fraction[1] >= 1.0, min_fraction[1], 1.0});
  }
  return verdicts;
}

void write_rounds_csv(const std::filesystem::path& path,
                      const std::vector<ExperimentResult>& results) {
  std::size_t weight_columns = 0;
  for (const auto& r : results)
    for (const auto& rec : r.protocol.records)
      weight_columns = std::max(weight_columns, rec.weight_history.size());
  std::vector<std::string> columns{"target_domain", "round", "client_id", "considered",
                                   "discarded", "discard_ratio", "mean_loss", "steps",
                                   "global_param_norm"};
  for (std::size_t k = 1; k <= weight_columns; ++k) columns.push_back("weight_iter" + std::to_string(k));
  CsvWriter csv(path, columns);
  for (const auto& r : results)
    for (const auto& rec : r.protocol.records)
      for (std::size_t i = 0; i < rec.clients.size(); ++i) {
        const auto& c = rec.clients[i];
        csv.cell(r.target_domain).cell(rec.round).cell(r.training_domains.at(c.client_id))
            .cell(c.considered).cell(c.discarded).cell(c.discard_ratio).cell(c.mean_loss)
            .cell(c.steps).cell(rec.global_param_norm);
        for (std::size_t k = 0; k < weight_columns; ++k) {
          if (k < rec.weight_history.size())
            csv.cell(rec.weight_history[k][i]);
          else
            csv.cell(std::string_view{});
        }
        csv.end_row();
      }
}

void write_probe_csv(const std::filesystem::path& path, const std::vector<ExperimentResult>& results,
                     const ExperimentConfig& config) {
  CsvWriter csv(path, {"target_domain", "labeled_fraction", "accuracy", "seed", "algorithm"});
  for (const auto& r : results)
    for (const auto& p : r.probes)
      csv.cell(p.target_domain).cell(p.labeled_fraction).cell(p.accuracy)
          .cell(static_cast<std::size_t>(p.seed)).cell(to_string(config.algorithm)).end_row();
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  CsvWriter csv(path, {"tau", "local_epochs", "rounds", "agg_iterations", "batch_size",
                       "target_domain", "labeled_fraction", "accuracy", "mean_discard_ratio", "seed"});
  for (const auto& r : rows)
    csv.cell(r.tau).cell(r.local_epochs).cell(r.rounds).cell(r.agg_iterations).cell(r.batch_size)
        .cell(r.probe.target_domain).cell(r.probe.labeled_fraction).cell(r.probe.accuracy)
        .cell(r.mean_discard_ratio).cell(static_cast<std::size_t>(r.probe.seed)).end_row();
}

void write_verdicts_json(const std::filesystem::path& path, const std::vector<Verdict>& verdicts) {
  auto number = [](double v) { return std::isfinite(v) ? format_real(v) : std::string("null"); };
  std::string out = "{\n";
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const auto& v = verdicts[i];
    out += "  \"" + v.name + "\": {\"result\": \"" + (v.passed ? "pass" : "fail") +
           "\", \"statistic\": " + number(v.statistic) + ", \"threshold\": " + number(v.threshold) +
           "}" + (i + 1 < verdicts.size() ? ",\n" : "\n");
  }
  out += "}\n";
  write_text_file(path, out);
}

void write_resolved_config(const std::filesystem::path& dir, const ExperimentConfig& config) {
  write_text_file(dir / "resolved.cfg", canonical_config(config));
}

}  // namespace fedgala

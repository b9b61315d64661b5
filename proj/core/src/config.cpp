#include "fedgala/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "fedgala/errors.hpp"
#include "fedgala/io.hpp"

namespace fedgala {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::uint64_t to_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError("expected a non-negative integer, got '" + std::string(s) + "'");
  return v;
}

double to_real(std::string_view s) {
  // strtod accepts the same grammar on every libc for plain decimals.
  const std::string copy(s);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size() || !std::isfinite(v))
    throw ConfigError("expected a finite real number, got '" + copy + "'");
  return v;
}

bool to_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("expected true or false, got '" + std::string(s) + "'");
}

std::vector<double> to_real_list(std::string_view s) {
  std::vector<double> out;
  for (auto p : split_list(s)) out.push_back(to_real(p));
  if (out.empty()) throw ConfigError("expected a non-empty comma-separated list");
  return out;
}

std::vector<std::size_t> to_count_list(std::string_view s) {
  std::vector<std::size_t> out;
  for (auto p : split_list(s)) out.push_back(to_u64(p));
  if (out.empty()) throw ConfigError("expected a non-empty comma-separated list");
  return out;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>)
      out += format_real(xs[i]);
    else
      out += std::to_string(xs[i]);
  }
  return out;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

struct Entry {
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define FG_COUNT(field) \
  Entry { [](ExperimentConfig& c, std::string_view v) { c.field = to_u64(v); }, \
          [](const ExperimentConfig& c) { return std::to_string(c.field); } }
#define FG_REAL(field) \
  Entry { [](ExperimentConfig& c, std::string_view v) { c.field = to_real(v); }, \
          [](const ExperimentConfig& c) { return format_real(c.field); } }
#define FG_BOOL(field) \
  Entry { [](ExperimentConfig& c, std::string_view v) { c.field = to_bool(v); }, \
          [](const ExperimentConfig& c) { return bool_text(c.field); } }
#define FG_REALS(field) \
  Entry { [](ExperimentConfig& c, std::string_view v) { c.field = to_real_list(v); }, \
          [](const ExperimentConfig& c) { return join(c.field); } }
#define FG_COUNTS(field) \
  Entry { [](ExperimentConfig& c, std::string_view v) { c.field = to_count_list(v); }, \
          [](const ExperimentConfig& c) { return join(c.field); } }

const std::map<std::string, Entry, std::less<>>& entries() {
  static const std::map<std::string, Entry, std::less<>> table = {
      {"seed", FG_COUNT(seed)},
      {"protocol.clients", FG_COUNT(clients)},
      {"protocol.rounds", FG_COUNT(rounds)},
      {"protocol.local_epochs", FG_COUNT(local_epochs)},
      {"protocol.batch_size", FG_COUNT(batch_size)},
      {"protocol.tau", FG_REAL(tau)},
      {"protocol.agg_iterations", FG_COUNT(agg_iterations)},
      {"protocol.learning_rate", FG_REAL(learning_rate)},
      {"protocol.size_weighted_fedavg", FG_BOOL(size_weighted_fedavg)},
      {"algorithm.name",
       Entry{[](ExperimentConfig& c, std::string_view v) { c.algorithm = algorithm_from_string(v); },
             [](const ExperimentConfig& c) { return std::string(to_string(c.algorithm)); }}},
      {"algorithm.reweight_factor", FG_REAL(reweight_factor)},
      {"algorithm.l2_lambda", FG_REAL(l2_lambda)},
      {"algorithm.prox_mu", FG_REAL(prox_mu)},
      {"encoder.kind",
       Entry{[](ExperimentConfig& c, std::string_view v) {
               if (v == "mlp")
                 c.encoder.kind = EncoderKind::Mlp;
               else if (v == "one_layer")
                 c.encoder.kind = EncoderKind::OneLayer;
               else
                 throw ConfigError("expected mlp or one_layer, got '" + std::string(v) + "'");
             },
             [](const ExperimentConfig& c) {
               return std::string(c.encoder.kind == EncoderKind::Mlp ? "mlp" : "one_layer");
             }}},
      {"encoder.arch",
       Entry{[](ExperimentConfig& c, std::string_view v) { c.encoder.arch.widths = to_count_list(v); },
             [](const ExperimentConfig& c) {
               return c.encoder.kind == EncoderKind::Mlp ? join(c.resolved_encoder().arch.widths)
                                                         : join(c.encoder.arch.widths);
             }}},
      {"loss.kind",
       Entry{[](ExperimentConfig& c, std::string_view v) {
               if (v == "ntxent")
                 c.loss.kind = LossKind::NtXent;
               else if (v == "binary_contrastive")
                 c.loss.kind = LossKind::BinaryContrastive;
               else
                 throw ConfigError("expected ntxent or binary_contrastive, got '" +
                                   std::string(v) + "'");
             },
             [](const ExperimentConfig& c) {
               return std::string(c.loss.kind == LossKind::NtXent ? "ntxent" : "binary_contrastive");
             }}},
      {"loss.temperature", FG_REAL(loss.temperature)},
      {"domains.count", FG_COUNT(domain_count)},
      {"domains.features", FG_COUNT(features)},
      {"domains.samples", FG_COUNT(samples)},
      {"domains.rho", FG_REALS(rho)},
      {"domains.rho_spread", FG_REAL(rho_spread)},
      {"domains.label_threshold", FG_REAL(label_threshold)},
      {"eval.labeled_fractions", FG_REALS(labeled_fractions)},
      {"eval.epochs", FG_COUNT(probe_epochs)},
      {"eval.learning_rate", FG_REAL(probe_learning_rate)},
      {"eval.target_domain",
       Entry{[](ExperimentConfig& c, std::string_view v) {
               if (v == "last")
                 c.target_domain.reset();
               else
                 c.target_domain = to_u64(v);
             },
             [](const ExperimentConfig& c) { return std::to_string(c.resolved_target()); }}},
      {"theory.features", FG_COUNT(theory.feature_count)},
      {"theory.samples", FG_COUNT(theory.samples)},
      {"theory.seeds",
       Entry{[](ExperimentConfig& c, std::string_view v) {
               c.theory.seeds.clear();
               for (auto s : to_count_list(v)) c.theory.seeds.push_back(s);
             },
             [](const ExperimentConfig& c) { return join(c.theory.seeds); }}},
      {"theory.epochs", FG_COUNT(theory.epochs)},
      {"theory.batch_size", FG_COUNT(theory.batch_size)},
      {"theory.learning_rate", FG_REAL(theory.learning_rate)},
      {"theory.summary",
       Entry{[](ExperimentConfig& c, std::string_view v) {
               c.theory.summary = cov_summary_from_string(std::string(v));
             },
             [](const ExperimentConfig& c) { return std::string(to_string(c.theory.summary)); }}},
      {"theory.cov_grid", FG_REALS(cov_grid)},
      {"theory.proposition_trials", FG_COUNT(proposition_trials)},
      {"theory.claim_trials", FG_COUNT(claim_trials)},
      {"theory.lemma1_samples", FG_COUNT(lemma1_samples)},
      {"theory.lemma2_draws", FG_COUNT(lemma2_draws)},
      {"sweep.mode",
       Entry{[](ExperimentConfig& c, std::string_view v) {
               if (v == "grid")
                 c.sweep.mode = SweepMode::Grid;
               else if (v == "comm_frequency")
                 c.sweep.mode = SweepMode::CommFrequency;
               else
                 throw ConfigError("expected grid or comm_frequency, got '" + std::string(v) + "'");
             },
             [](const ExperimentConfig& c) {
               return std::string(c.sweep.mode == SweepMode::Grid ? "grid" : "comm_frequency");
             }}},
      {"sweep.tau", FG_REALS(sweep.tau)},
      {"sweep.local_epochs", FG_COUNTS(sweep.local_epochs)},
      {"sweep.agg_iterations", FG_COUNTS(sweep.agg_iterations)},
      {"sweep.batch_size", FG_COUNTS(sweep.batch_size)},
      {"sweep.total_local_epochs", FG_COUNT(sweep.total_local_epochs)},
      {"sweep.e_values", FG_COUNTS(sweep.e_values)},
      {"output.write_domains", FG_BOOL(write_domains)},
      {"output.write_checkpoint", FG_BOOL(write_checkpoint)},
  };
  return table;
}

#undef FG_COUNT
#undef FG_REAL
#undef FG_BOOL
#undef FG_REALS
#undef FG_COUNTS

std::string valid_keys_text() {
  std::string out;
  for (const auto& [k, e] : entries()) out += "\n  " + k;
  return out;
}

void require(bool ok, const char* key, const std::string& why) {
  if (!ok) throw ConfigError(std::string(key) + ": " + why);
}

}  // namespace

const char* to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::FedGaLA:
      return "fedgala";
    case Algorithm::FedAvgSsl:
      return "fedavg_ssl";
    case Algorithm::FedGaLAReweight:
      return "fedgala_reweight";
    case Algorithm::FedGaLAL2:
      return "fedgala_l2";
    case Algorithm::FedGaLAProx:
      return "fedgala_prox";
    case Algorithm::LocalOnly:
      return "local_only";
  }
  return "?";
}

Algorithm algorithm_from_string(std::string_view name) {
  for (Algorithm a : {Algorithm::FedGaLA, Algorithm::FedAvgSsl, Algorithm::FedGaLAReweight,
                      Algorithm::FedGaLAL2, Algorithm::FedGaLAProx, Algorithm::LocalOnly})
    if (name == to_string(a)) return a;
  throw ConfigError("unknown algorithm '" + std::string(name) +
                    "' (expected fedgala, fedavg_ssl, fedgala_reweight, fedgala_l2, "
                    "fedgala_prox or local_only)");
}

EncoderSpec ExperimentConfig::resolved_encoder() const {
  EncoderSpec spec = encoder;
  if (spec.kind == EncoderKind::Mlp && spec.arch.widths.empty())
    spec.arch = MlpArch::default_for(features);
  return spec;
}

std::size_t ExperimentConfig::resolved_target() const {
  return target_domain.value_or(domain_count == 0 ? 0 : domain_count - 1);
}

VariantConfig ExperimentConfig::variant() const {
  VariantConfig v;
  switch (algorithm) {
    case Algorithm::FedGaLAReweight:
      v.local_mode = LocalMode::Reweight;
      v.reweight_factor = reweight_factor;
      break;
    case Algorithm::FedGaLAL2:
      v.l2_lambda = l2_lambda;
      break;
    case Algorithm::FedGaLAProx:
      v.prox_mu = prox_mu;
      break;
    default:
      break;
  }
  return v;
}

LocalRoundOptions ExperimentConfig::local_options() const {
  LocalRoundOptions o;
  o.epochs = local_epochs;
  o.batch_size = batch_size;
  o.tau = tau;
  o.filter = algorithm != Algorithm::FedAvgSsl && algorithm != Algorithm::LocalOnly;
  o.variant = variant();
  o.encoder = resolved_encoder();
  o.loss = loss;
  return o;
}

void ExperimentConfig::validate() const {
  require(clients >= 1, "protocol.clients", "must be >= 1");
  require(local_epochs >= 1, "protocol.local_epochs", "must be >= 1");
  require(batch_size >= 1, "protocol.batch_size", "must be >= 1");
  require(tau >= -1.0 && tau <= 1.0, "protocol.tau", "must lie in [-1, 1]");
  require(learning_rate > 0.0, "protocol.learning_rate", "must be > 0");
  require(algorithm != Algorithm::FedGaLAReweight || (reweight_factor > 0.0 && reweight_factor <= 1.0),
          "algorithm.reweight_factor", "must lie in (0, 1]");
  require(l2_lambda >= 0.0, "algorithm.l2_lambda", "must be >= 0");
  require(prox_mu >= 0.0, "algorithm.prox_mu", "must be >= 0");
  require(loss.temperature > 0.0, "loss.temperature", "must be > 0");
  require(features >= 1, "domains.features", "must be >= 1");
  require(samples >= 2, "domains.samples", "must be >= 2");
  require(domain_count >= 2, "domains.count", "needs at least 2 domains");
  require(rho.size() == 1 || rho.size() == domain_count, "domains.rho",
          "give one value or one per domain");
  for (double r : rho) require(r >= 0.0 && r <= 1.0, "domains.rho", "entries must lie in [0, 1]");
  require(rho_spread >= 0.0, "domains.rho_spread", "must be >= 0");
  require(resolved_target() < domain_count, "eval.target_domain", "out of range");
  require(clients < domain_count, "protocol.clients",
          "must leave the target domain out (clients < domains.count)");
  for (double f : labeled_fractions)
    require(f > 0.0 && f < 1.0, "eval.labeled_fractions", "entries must lie in (0, 1)");
  require(probe_learning_rate > 0.0, "eval.learning_rate", "must be > 0");

  const EncoderSpec enc = resolved_encoder();
  if (enc.kind == EncoderKind::Mlp) {
    require(enc.arch.widths.size() >= 2, "encoder.arch", "needs at least input and output widths");
    require(enc.arch.input_dim() == features, "encoder.arch",
            "first width must equal domains.features");
    require(loss.kind == LossKind::NtXent, "loss.kind", "the mlp encoder trains with ntxent");
  } else {
    require(loss.kind == LossKind::BinaryContrastive, "loss.kind",
            "the one_layer encoder trains with binary_contrastive");
  }
  const std::size_t batch = std::min(batch_size, samples);
  require(samples % batch == 0 || samples % batch >= min_batch_size(loss.kind),
          "protocol.batch_size", "leaves a final batch too small for the loss");

  require(theory.feature_count >= 1, "theory.features", "must be >= 1");
  require(theory.samples >= 2, "theory.samples", "must be >= 2");
  require(!theory.seeds.empty(), "theory.seeds", "needs at least one seed");
  require(theory.learning_rate > 0.0, "theory.learning_rate", "must be > 0");
  require(cov_grid.size() >= 3, "theory.cov_grid", "needs at least 3 points");
  for (double c : cov_grid) require(c > 0.0 && c < 1.0, "theory.cov_grid", "entries must lie in (0, 1)");
  for (double t : sweep.tau) require(t >= -1.0 && t <= 1.0, "sweep.tau", "entries must lie in [-1, 1]");
  for (auto e : sweep.local_epochs) require(e >= 1, "sweep.local_epochs", "entries must be >= 1");
  for (auto b : sweep.batch_size) require(b >= 1, "sweep.batch_size", "entries must be >= 1");
  for (auto e : sweep.e_values) require(e >= 1, "sweep.e_values", "entries must be >= 1");
  require(sweep.total_local_epochs >= 1, "sweep.total_local_epochs", "must be >= 1");
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" +
                        std::string(line) + "'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = entries().find(key);
    if (it == entries().end())
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) +
                        "'; valid keys are:" + valid_keys_text());
    try {
      it->second.set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + std::string(key) +
                        "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("file not found: " + path.string());
  return parse_config(read_text_file(path));
}

std::string canonical_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [k, e] : entries()) out += k + " = " + e.get(config) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, e] : entries()) keys.push_back(k);
  return keys;
}

}  // namespace fedgala

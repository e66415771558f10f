/*
 * Copyright 2026 The siasim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "siasim/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>

#include "siasim/errors.hpp"
#include "siasim/linksim.hpp"
#include "siasim/scheme.hpp"
#include "siasim/verifier.hpp"

#ifndef SIASIM_VERSION
#define SIASIM_VERSION "unknown"
#endif

namespace siasim::cli {

using siasim::to_string;

namespace {

const std::map<std::string, Command> kCommands{
    {"params", Command::kParams},         {"verify-sia", Command::kVerifySia},
    {"verify-alignment", Command::kVerifyAlignment}, {"verify-rank", Command::kVerifyRank},
    {"dof-table", Command::kDofTable},    {"simulate", Command::kSimulate},
};

const char* status_of(bool passed) { return passed ? "pass" : "fail"; }

Json check(const std::string& name, const char* status, Json details) {
  Json c;
  c["name"] = name;
  c["status"] = status;
  c["details"] = std::move(details);
  return c;
}

Json exponents_json(const std::vector<int>& e) {
  Json out = Json::array();
  for (int x : e) out.push_back(x);
  return out;
}

std::string trial_prefix(std::uint64_t seed) { return fmt::format("seed {}: ", seed); }

template <typename F>
auto with_ring(RingKind ring, F&& f) {
  switch (ring) {
    case RingKind::kReal:
      return f(double{});
    case RingKind::kComplex:
      return f(Complex{});
    case RingKind::kPrimeField:
      break;
  }
  return f(Fp61{});
}

template <Scalar S>
ChannelSet<S> channels_for(const RunConfig& c, const SchemeParams& params, std::uint64_t seed, std::size_t dim) {
  if (c.identity_channels) return identity_channels<S>(params, dim);
  return sample_channels<S>(params, seed, dim);
}

// ---------------------------------------------------------------- params

Json run_params(const RunConfig& c, const SchemeParams& p, std::vector<Json>& checks) {
  Json d;
  d["l"] = p.l;
  d["mu_n"] = to_decimal(p.mu_n);
  d["mu_n1"] = to_decimal(p.mu_n1);
  d["lambda_n"] = to_decimal(p.lambda_n);
  d["P"] = p.P;
  d["slots_per_user"] = p.slots_per_user();
  d["dof_total"] = to_string(p.total_dof());
  d["dof_total_decimal"] = format_double(to_double(p.total_dof()));
  d["dof_limit"] = to_string(p.dof_limit());
  d["dof_limit_decimal"] = format_double(to_double(p.dof_limit()));
  d["materializable"] = p.materializable;
  Json sets = Json::array();
  for (int i = 0; i < c.K; ++i) {
    Json members = Json::array();
    for (int m : cooperation_set(i, c.K, c.M).members) members.push_back(m);
    sets.push_back(std::move(members));
  }
  d["cooperation_sets"] = std::move(sets);
  checks.push_back(check("params", "pass", d));
  return Json::object();
}

// ---------------------------------------------------------------- verify-sia

struct SiaTrial {
  bool structure_ok = true;
  std::string structure_error;
  CramerCheck cramer;
  bool cramer_run = false;
};

template <Scalar S>
void run_verify_sia(const RunConfig& c, const SchemeParams& p, WorkerPool* pool, std::vector<Json>& checks) {
  const std::size_t dim = c.lambda ? *c.lambda : p.extension_length();
  const bool with_cramer = c.M <= 6;
  std::vector<SiaTrial> trials(static_cast<std::size_t>(c.trials));
  parallel_for(pool, trials.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const std::uint64_t seed = c.seed + t;
      const auto ch = channels_for<S>(c, p, seed, dim);
      auto& out = trials[t];
      out.cramer_run = with_cramer;
      for (int k = 0; k < c.K; ++k) {
        const auto state = stack_decoder(ch, k);
        std::optional<ProcessedState<S>> processed;
        try {
          processed = sia_run(state);
        } catch (const InternalError& e) {
          if (out.structure_ok) out.structure_error = trial_prefix(seed) + fmt::format("decoder {}: {}", k, e.what());
          out.structure_ok = false;
          continue;
        }
        if (!with_cramer) continue;
        const auto cc = check_cramer(*processed, sia_oracle(state));
        out.cramer.positions_checked += cc.positions_checked;
        out.cramer.positions_skipped += cc.positions_skipped;
        out.cramer.worst_relative_error = std::max(out.cramer.worst_relative_error, cc.worst_relative_error);
        if (!cc.passed && out.cramer.passed) out.cramer.first_failure = trial_prefix(seed) + cc.first_failure.value_or("");
        out.cramer.passed = out.cramer.passed && cc.passed;
      }
    }
  });

  std::size_t structure_passed = 0;
  std::size_t cramer_passed = 0;
  CramerCheck total;
  std::optional<std::string> structure_failure;
  for (const auto& t : trials) {
    structure_passed += t.structure_ok ? 1 : 0;
    if (!t.structure_ok && !structure_failure) structure_failure = t.structure_error;
    cramer_passed += t.cramer.passed ? 1 : 0;
    total.positions_checked += t.cramer.positions_checked;
    total.positions_skipped += t.cramer.positions_skipped;
    total.worst_relative_error = std::max(total.worst_relative_error, t.cramer.worst_relative_error);
    if (!t.cramer.passed && !total.first_failure) total.first_failure = t.cramer.first_failure;
  }
  Json sd;
  sd["trials"] = c.trials;
  sd["trials_passed"] = structure_passed;
  sd["decoders"] = c.K;
  sd["steps"] = c.M - 1;
  sd["extension_length"] = dim;
  sd["first_failure"] = structure_failure ? Json(*structure_failure) : Json(nullptr);
  checks.push_back(check("sia.structure", status_of(structure_passed == trials.size()), sd));

  Json cd;
  if (!with_cramer) {
    cd["reason"] = "cofactor reference limited to M <= 6";
    checks.push_back(check("sia.cramer", "skipped", cd));
    return;
  }
  cd["trials"] = c.trials;
  cd["trials_passed"] = cramer_passed;
  cd["positions_checked"] = total.positions_checked;
  cd["positions_skipped"] = total.positions_skipped;
  if (!ScalarTraits<S>::exact) cd["worst_relative_error"] = format_double(total.worst_relative_error);
  cd["first_failure"] = total.first_failure ? Json(*total.first_failure) : Json(nullptr);
  checks.push_back(check("sia.cramer", status_of(cramer_passed == trials.size()), cd));
}

// ---------------------------------------------------------------- verify-alignment

struct ConditionTally {
  std::string name;
  std::size_t passed = 0;
  std::size_t columns_checked = 0;
  Json counterexample = nullptr;
};

template <Scalar S>
void run_verify_alignment(const RunConfig& c, const SchemeParams& p, WorkerPool* pool, std::vector<Json>& checks) {
  const std::size_t dim = p.extension_length();
  BasisOptions options;
  options.omitted = c.ablate;
  options.memory_budget = c.memory_budget;
  options.pool = pool;
  AlignmentOptions aopts;
  aopts.pool = pool;

  std::vector<ConditionTally> conditions;
  std::vector<ConditionTally> nesting;
  double worst = 0.0;
  for (int t = 0; t < c.trials; ++t) {
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(t);
    const auto scheme = build_scheme(channels_for<S>(c, p, seed, dim), options);
    const auto rep = check_alignment(scheme.bases, *scheme.generators, scheme.params, aopts);
    worst = std::max(worst, rep.worst_relative_error);
    if (conditions.empty()) {
      for (const auto& r : rep.conditions) {
        conditions.push_back({fmt::format("alignment.stream{}.{}", r.stream, r.generator.label()), 0, r.columns_checked, nullptr});
      }
      for (const auto& r : rep.nesting) nesting.push_back({fmt::format("nesting.stream{}", r.stream), 0, 0, nullptr});
    }
    for (std::size_t i = 0; i < rep.conditions.size(); ++i) {
      const auto& r = rep.conditions[i];
      auto& tally = conditions[i];
      if (r.passed) {
        ++tally.passed;
      } else if (tally.counterexample.is_null()) {
        Json ce;
        ce["seed"] = seed;
        ce["index_shift_ok"] = r.index_shift_ok;
        ce["columns_ok"] = r.columns_ok;
        ce["homogenizer_ok"] = r.homogenizer_ok;
        ce["exponents"] = r.counterexample ? exponents_json(*r.counterexample) : Json(nullptr);
        tally.counterexample = std::move(ce);
      }
    }
    for (std::size_t i = 0; i < rep.nesting.size(); ++i) {
      const auto& r = rep.nesting[i];
      if (r.passed) {
        ++nesting[i].passed;
      } else if (nesting[i].counterexample.is_null()) {
        Json ce;
        ce["seed"] = seed;
        ce["exponents"] = r.counterexample ? exponents_json(*r.counterexample) : Json(nullptr);
        nesting[i].counterexample = std::move(ce);
      }
    }
  }
  auto emit = [&](const ConditionTally& tally, bool with_columns) {
    Json d;
    d["trials"] = c.trials;
    d["trials_passed"] = tally.passed;
    if (with_columns) d["columns_checked"] = tally.columns_checked;
    if (!ScalarTraits<S>::exact) d["worst_relative_error"] = format_double(worst);
    d["counterexample"] = tally.counterexample;
    checks.push_back(check(tally.name, status_of(tally.passed == static_cast<std::size_t>(c.trials)), d));
  };
  for (const auto& tally : conditions) emit(tally, true);
  for (const auto& tally : nesting) emit(tally, false);
}

// ---------------------------------------------------------------- verify-rank

struct RankTally {
  std::string name;
  std::size_t passed = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t required = 0;
  std::size_t min_rank = 0;
  Json first_failure = nullptr;
  bool seen = false;
};

void tally_rank(RankTally& tally, std::size_t rows, std::size_t cols, std::size_t rank, std::size_t required,
                std::uint64_t seed) {
  if (!tally.seen) {
    tally.rows = rows;
    tally.cols = cols;
    tally.required = required;
    tally.min_rank = rank;
    tally.seen = true;
  }
  tally.min_rank = std::min(tally.min_rank, rank);
  if (rank == required) {
    ++tally.passed;
  } else if (tally.first_failure.is_null()) {
    Json f;
    f["seed"] = seed;
    f["rank"] = rank;
    tally.first_failure = std::move(f);
  }
}

template <Scalar S>
void run_verify_rank(const RunConfig& c, const SchemeParams& p, WorkerPool* pool, std::vector<Json>& checks) {
  const std::size_t dim = p.extension_length();
  BasisOptions options;
  options.memory_budget = c.memory_budget;
  options.pool = pool;
  RankOptions ropts;
  ropts.policy = c.policy;
  ropts.tau = c.tau;
  ropts.pool = pool;

  std::vector<int> decoders;
  for (int k = 0; k < c.K; ++k) {
    if (!c.decoder || *c.decoder == k) decoders.push_back(k);
  }
  std::map<std::string, RankTally> tallies;
  std::vector<std::string> order;
  auto tally_for = [&](const std::string& name) -> RankTally& {
    auto [it, inserted] = tallies.try_emplace(name);
    if (inserted) {
      it->second.name = name;
      order.push_back(name);
    }
    return it->second;
  };

  for (int t = 0; t < c.trials; ++t) {
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(t);
    const auto scheme = build_scheme(channels_for<S>(c, p, seed, dim), options);
    for (int k : decoders) {
      const auto rep = check_rank_conditions(k, scheme.bases, *scheme.generators, ropts, c.memory_budget);
      for (const auto& s : rep.subspaces) {
        tally_rank(tally_for(fmt::format("rank.decoder{}.subspace{}", k, s.subspace)), s.rows, s.cols, s.rank,
                   s.required, seed);
      }
      if (c.full_matrix) {
        auto full = assemble_full_matrix(k, scheme.bases, *scheme.generators, c.memory_budget, pool);
        const std::size_t rows = full.rows();
        const std::size_t cols = full.cols();
        const std::size_t r = rank_in_place(full, ropts);
        tally_rank(tally_for(fmt::format("rank.decoder{}.full", k)), rows, cols, r, std::min(rows, cols), seed);
      }
    }
  }
  for (const auto& name : order) {
    const auto& tally = tallies.at(name);
    Json d;
    d["trials"] = c.trials;
    d["trials_passed"] = tally.passed;
    d["rows"] = tally.rows;
    d["cols"] = tally.cols;
    d["required"] = tally.required;
    d["min_rank"] = tally.min_rank;
    d["policy"] = to_string(c.policy);
    d["first_failure"] = tally.first_failure;
    checks.push_back(check(name, status_of(tally.passed == static_cast<std::size_t>(c.trials)), d));
  }
}

// ---------------------------------------------------------------- dof-table

Json run_dof_table(const RunConfig& c, std::vector<Json>& checks, std::string* csv) {
  const auto table = dof_table(c.K, c.M, c.n_min, c.n_max);
  Json rows = Json::array();
  bool below = true;
  bool increasing = true;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    below = below && r.dof < table.limit;
    if (i > 0) increasing = increasing && r.dof > table.rows[i - 1].dof;
    Json row;
    row["n"] = r.n;
    row["mu_n"] = to_decimal(r.mu_n);
    row["mu_n1"] = to_decimal(r.mu_n1);
    row["lambda_n"] = to_decimal(r.lambda_n);
    row["dof_total"] = to_string(r.dof);
    row["dof_total_decimal"] = format_double(to_double(r.dof));
    rows.push_back(std::move(row));
  }
  Json d;
  d["limit"] = to_string(table.limit);
  d["limit_decimal"] = format_double(to_double(table.limit));
  checks.push_back(check("dof.below_limit", status_of(below), d));
  checks.push_back(check("dof.increasing", status_of(increasing), Json::object()));
  if (csv != nullptr) {
    *csv = "n,mu_n,mu_n1,lambda_n,dof_total,dof_limit\n";
    for (const auto& r : table.rows) {
      *csv += fmt::format("{},{},{},{},{},{}\n", r.n, to_decimal(r.mu_n), to_decimal(r.mu_n1), to_decimal(r.lambda_n),
                          format_double(to_double(r.dof)), format_double(to_double(table.limit)));
    }
  }
  Json results;
  results["limit"] = to_string(table.limit);
  results["limit_decimal"] = format_double(to_double(table.limit));
  results["rows"] = std::move(rows);
  return results;
}

// ---------------------------------------------------------------- simulate

template <Scalar S>
Json run_simulate(const RunConfig& c, const SchemeParams& p, WorkerPool* pool, std::vector<Json>& checks) {
  if constexpr (ScalarTraits<S>::exact) {
    throw InvalidArgument("simulate needs a float ring (real or complex)");
  } else {
    if (p.lambda_n > c.link_bound) {
      throw ResourceLimit(fmt::format("link simulation: extension length {} exceeds the link bound {}",
                                      to_decimal(p.lambda_n), c.link_bound));
    }
    std::vector<double> snr;
    for (double db : c.snr_db) snr.push_back(db_to_linear(db));
    BasisOptions options;
    options.memory_budget = c.memory_budget;
    options.pool = pool;
    LinkOptions lopts;
    lopts.noise_realizations = c.realizations;
    lopts.lambda_bound = static_cast<std::size_t>(c.link_bound);
    lopts.pool = pool;

    Json trials = Json::array();
    bool slope_ok = true;
    bool nulling_ok = true;
    bool separable = true;
    double worst_leak = 0.0;
    double worst_sensitivity = 0.0;
    double target = 0.0;
    Json slope_failure = nullptr;
    for (int t = 0; t < c.trials; ++t) {
      const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(t);
      const auto scheme = build_scheme(channels_for<S>(c, p, seed, p.extension_length()), options);
      lopts.seed = seed;
      const auto rep = run_link(scheme, snr, lopts);
      const auto probe = probe_leakage(scheme, seed);
      target = rep.target_slope;
      worst_leak = std::max(worst_leak, probe.worst_amplitude);
      worst_sensitivity = std::max(worst_sensitivity, probe.worst_symbol_sensitivity);
      nulling_ok = nulling_ok && probe.passed;

      Json tr;
      tr["seed"] = seed;
      Json points = Json::array();
      for (std::size_t i = 0; i < rep.points.size(); ++i) {
        const auto& pt = rep.points[i];
        Json pj;
        pj["snr_db"] = format_double(c.snr_db[i]);
        pj["sum_rate"] = format_double(pt.sum_rate);
        Json users = Json::array();
        for (double r : pt.user_rates) users.push_back(format_double(r));
        pj["user_rates"] = std::move(users);
        Json subs = Json::array();
        for (const auto& l : pt.subspaces) {
          separable = separable && !l.rank_deficient;
          Json sj;
          sj["decoder"] = l.decoder;
          sj["subspace"] = l.subspace;
          sj["rate_bits"] = format_double(l.rate_bits);
          sj["condition_number"] = format_double(l.condition_number);
          sj["rank_deficient"] = l.rank_deficient;
          sj["predicted_mse"] = format_double(l.predicted_mse);
          sj["empirical_mse"] = format_double(l.empirical_mse);
          subs.push_back(std::move(sj));
        }
        pj["subspaces"] = std::move(subs);
        points.push_back(std::move(pj));
      }
      tr["points"] = std::move(points);
      if (rep.fit) {
        tr["slope"] = format_double(rep.fit->slope);
        tr["intercept"] = format_double(rep.fit->intercept);
        tr["fit_residual"] = format_double(rep.fit->residual);
        const bool ok = std::abs(rep.fit->slope - rep.target_slope) <= c.slope_tolerance * rep.target_slope;
        if (!ok && slope_failure.is_null()) {
          slope_failure = Json::object();
          slope_failure["seed"] = seed;
          slope_failure["slope"] = format_double(rep.fit->slope);
        }
        slope_ok = slope_ok && ok;
      } else {
        tr["slope"] = nullptr;
        slope_ok = false;
        if (slope_failure.is_null()) {
          slope_failure = Json::object();
          slope_failure["seed"] = seed;
          slope_failure["reason"] = "fit needs at least 3 positive SNR points spanning 20 dB";
        }
      }
      trials.push_back(std::move(tr));
    }
    Json sd;
    sd["target_slope"] = format_double(target);
    sd["tolerance"] = format_double(c.slope_tolerance);
    sd["first_failure"] = slope_failure;
    checks.push_back(check("link.slope", status_of(slope_ok), sd));
    Json nd;
    nd["worst_leakage"] = format_double(worst_leak);
    nd["worst_symbol_sensitivity"] = format_double(worst_sensitivity);
    nd["tolerance"] = format_double(1e-10);
    checks.push_back(check("link.nulling", status_of(nulling_ok), nd));
    checks.push_back(check("link.separability", status_of(separable), Json::object()));
    Json results;
    results["trials"] = std::move(trials);
    return results;
  }
}

void validate(const RunConfig& c) {
  if (c.command == Command::kDofTable) {
    if (c.n_min < 1 || c.n_max < c.n_min) throw InvalidArgument("need 1 <= n-min <= n-max");
  }
  build_params(c.K, c.M, c.n);
  if (c.trials < 1) throw InvalidArgument("trials must be at least 1");
  if (c.workers < 0) throw InvalidArgument("workers must be nonnegative");
  if (!(c.tau >= 0.0)) throw InvalidArgument("tau must be nonnegative");
  if (c.realizations < 0) throw InvalidArgument("realizations must be nonnegative");
  if (!(c.slope_tolerance > 0.0)) throw InvalidArgument("slope tolerance must be positive");
  if (c.lambda && *c.lambda < 1) throw InvalidArgument("lambda must be at least 1");
  if (c.decoder && (*c.decoder < 0 || *c.decoder >= c.K)) throw InvalidArgument("decoder out of range");
  if (c.format == OutputFormat::kCsv && c.command != Command::kDofTable) {
    throw InvalidArgument("csv output is only available for dof-table");
  }
  const bool exact_ring = c.ring == RingKind::kPrimeField;
  if ((c.policy == RankPolicy::kExact) != exact_ring) {
    throw InvalidArgument(fmt::format("rank policy {} does not apply to ring {}", to_string(c.policy), to_string(c.ring)));
  }
  if (c.command == Command::kSimulate && exact_ring) throw InvalidArgument("simulate needs a float ring (real or complex)");
  if (c.command == Command::kSimulate && c.snr_db.empty()) throw InvalidArgument("at least one SNR value is required");
  for (double db : c.snr_db) {
    if (!std::isfinite(db)) throw InvalidArgument("SNR values must be finite");
  }
  if (c.ablate) {
    const auto& g = *c.ablate;
    if (g.k < 0 || g.k >= c.K || g.index < 0 || g.index >= c.M) {
      throw InvalidArgument("ablated generator " + g.label() + " is out of range");
    }
  }
}

}  // namespace

const char* to_string(Command command) {
  for (const auto& [name, cmd] : kCommands) {
    if (cmd == command) return name.c_str();
  }
  return "unknown";
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

std::optional<GeneratorId> parse_generator(const std::string& text) {
  static const std::regex pattern(R"(^([TG])\[(\d+)\]\[(\d+)\]$)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) return std::nullopt;
  GeneratorId id;
  id.kind = m[1] == "T" ? GeneratorKind::kResidual : GeneratorKind::kDesired;
  try {
    id.k = std::stoi(m[2]);
    id.index = std::stoi(m[3]);
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
  return id;
}

std::uint64_t parse_bytes(const std::string& text) {
  static const std::regex pattern(R"(^\s*(\d+)\s*(|[KMGT]i?B?|B)\s*$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) throw InvalidArgument("invalid byte count '" + text + "'");
  std::uint64_t value = 0;
  try {
    value = std::stoull(m[1]);
  } catch (const std::out_of_range&) {
    throw InvalidArgument("byte count '" + text + "' is too large");
  }
  const std::string unit = m[2];
  int shift = 0;
  if (!unit.empty()) {
    switch (std::toupper(static_cast<unsigned char>(unit[0]))) {
      case 'K': shift = 10; break;
      case 'M': shift = 20; break;
      case 'G': shift = 30; break;
      case 'T': shift = 40; break;
      default: break;
    }
  }
  if (shift > 0 && value > (~std::uint64_t{0} >> shift)) throw InvalidArgument("byte count '" + text + "' is too large");
  return value << shift;
}

ParseOutcome parse_config(int argc, const char* const* argv, std::optional<std::string> environment_budget) {
  CLI::App app{"Simulator and verifier for successive interference alignment with cooperating receivers", "siasim"};
  app.set_version_flag("--version", SIASIM_VERSION);

  RunConfig c;
  std::string command;
  std::optional<int> K;
  std::string ring;
  std::string policy;
  std::string budget;
  std::string format = "json";
  std::string ablate;
  std::size_t lambda = 0;
  int decoder = -1;

  app.add_option("command", command, "params | verify-sia | verify-alignment | verify-rank | dof-table | simulate")
      ->required();
  app.add_option("--K", K, "number of users (must equal M + 2; defaults to M + 2)");
  app.add_option("--M", c.M, "cooperation order")->capture_default_str();
  app.add_option("--n", c.n, "scheme parameter n")->capture_default_str();
  app.add_option("--ring", ring, "real | complex | primefield (default: primefield, complex for simulate)");
  app.add_option("--seed", c.seed, "base seed; trial t uses seed + t")->capture_default_str();
  app.add_option("--trials", c.trials, "number of seeded channel realizations")->capture_default_str();
  app.add_option("--policy", policy, "rank policy: exact | float (default follows the ring)");
  app.add_option("--tau", c.tau, "relative pivot threshold for the float rank policy")->capture_default_str();
  app.add_option("--memory-budget", budget, "bytes, with optional K/M/G/T binary suffix (default 2G)");
  app.add_option("--snr", c.snr_db, "SNR points in dB")->delimiter(',');
  app.add_option("--realizations", c.realizations, "noise realizations per SNR point")->capture_default_str();
  app.add_option("--slope-tolerance", c.slope_tolerance, "relative slope tolerance")->capture_default_str();
  app.add_option("--link-bound", c.link_bound, "largest extension length for link simulation")->capture_default_str();
  app.add_option("-o,--output", c.output, "report path (default: standard output)");
  app.add_option("--format", format, "json | csv (csv only for dof-table)")->capture_default_str();
  app.add_option("--workers", c.workers, "worker threads (0: available parallelism)")->capture_default_str();
  app.add_option("--n-min", c.n_min, "dof-table first n")->capture_default_str();
  app.add_option("--n-max", c.n_max, "dof-table last n")->capture_default_str();
  app.add_option("--lambda", lambda, "verify-sia extension length override");
  app.add_option("--decoder", decoder, "verify-rank: check only this decoder");
  app.add_flag("--full", c.full_matrix, "verify-rank: also check the stacked decoder matrix");
  app.add_flag("--identity-channels", c.identity_channels, "use identity channels (diagnostic)");
  app.add_option("--ablate", ablate, "omit a generator from the precoders, e.g. T[1][0] or G[0][1]");
  app.add_flag("--timings", c.timings, "record wall-clock timings in the report");

  ParseOutcome out;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out.exit_code = 0;
    out.message = app.help();
    return out;
  } catch (const CLI::CallForVersion& e) {
    out.exit_code = 0;
    out.message = std::string(SIASIM_VERSION) + "\n";
    return out;
  } catch (const CLI::ParseError& e) {
    out.exit_code = 2;
    out.message = std::string(e.what()) + "\n";
    return out;
  }

  try {
    const auto it = kCommands.find(command);
    if (it == kCommands.end()) throw InvalidArgument("unknown command '" + command + "'");
    c.command = it->second;
    c.K = K.value_or(c.M + 2);
    if (ring.empty()) {
      c.ring = c.command == Command::kSimulate ? RingKind::kComplex : RingKind::kPrimeField;
    } else {
      const auto parsed_ring = parse_ring(ring);
      if (!parsed_ring) throw InvalidArgument("unknown ring '" + ring + "'");
      c.ring = *parsed_ring;
    }
    if (policy.empty()) {
      c.policy = c.ring == RingKind::kPrimeField ? RankPolicy::kExact : RankPolicy::kFloat;
    } else if (policy == "exact") {
      c.policy = RankPolicy::kExact;
    } else if (policy == "float") {
      c.policy = RankPolicy::kFloat;
    } else {
      throw InvalidArgument("unknown rank policy '" + policy + "'");
    }
    if (!budget.empty()) {
      c.memory_budget = parse_bytes(budget);
    } else if (environment_budget && !environment_budget->empty()) {
      c.memory_budget = parse_bytes(*environment_budget);
    }
    if (format == "json") {
      c.format = OutputFormat::kJson;
    } else if (format == "csv") {
      c.format = OutputFormat::kCsv;
    } else {
      throw InvalidArgument("unknown format '" + format + "'");
    }
    if (lambda != 0) c.lambda = lambda;
    if (decoder >= 0) c.decoder = decoder;
    if (!ablate.empty()) {
      c.ablate = parse_generator(ablate);
      if (!c.ablate) throw InvalidArgument("invalid generator '" + ablate + "', expected T[k][i] or G[k][r]");
    }
    validate(c);
  } catch (const InvalidArgument& e) {
    out.exit_code = 2;
    out.message = std::string("error: ") + e.what() + "\n";
    return out;
  }
  out.config = c;
  return out;
}

Json config_json(const RunConfig& c) {
  Json j;
  j["command"] = to_string(c.command);
  j["K"] = c.K;
  j["M"] = c.M;
  j["n"] = c.n;
  j["ring"] = to_string(c.ring);
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["policy"] = to_string(c.policy);
  j["tau"] = format_double(c.tau);
  j["memory_budget"] = c.memory_budget;
  switch (c.command) {
    case Command::kVerifySia:
      j["lambda"] = c.lambda ? Json(*c.lambda) : Json(nullptr);
      break;
    case Command::kVerifyAlignment:
      j["ablate"] = c.ablate ? Json(c.ablate->label()) : Json(nullptr);
      break;
    case Command::kVerifyRank:
      j["decoder"] = c.decoder ? Json(*c.decoder) : Json(nullptr);
      j["full_matrix"] = c.full_matrix;
      break;
    case Command::kDofTable:
      j["n_min"] = c.n_min;
      j["n_max"] = c.n_max;
      break;
    case Command::kSimulate: {
      Json snr = Json::array();
      for (double db : c.snr_db) snr.push_back(format_double(db));
      j["snr_db"] = std::move(snr);
      j["realizations"] = c.realizations;
      j["slope_tolerance"] = format_double(c.slope_tolerance);
      j["link_bound"] = c.link_bound;
      break;
    }
    case Command::kParams:
      break;
  }
  j["identity_channels"] = c.identity_channels;
  j["format"] = c.format == OutputFormat::kJson ? "json" : "csv";
  j["timings"] = c.timings;
  return j;
}

ExecutionResult execute(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  ExecutionResult out;
  Json report;
  report["config"] = config_json(c);
  report["version"] = SIASIM_VERSION;
  std::vector<Json> checks;
  Json results = Json::object();
  std::string csv;
  Json error = nullptr;

  try {
    validate(c);
    WorkerPool pool(static_cast<std::size_t>(c.workers));
    WorkerPool* pp = &pool;
    const auto params = build_params(c.K, c.M, c.n);
    switch (c.command) {
      case Command::kParams:
        results = run_params(c, params, checks);
        break;
      case Command::kVerifySia:
        with_ring(c.ring, [&](auto tag) { run_verify_sia<decltype(tag)>(c, params, pp, checks); });
        break;
      case Command::kVerifyAlignment:
        with_ring(c.ring, [&](auto tag) { run_verify_alignment<decltype(tag)>(c, params, pp, checks); });
        break;
      case Command::kVerifyRank:
        with_ring(c.ring, [&](auto tag) { run_verify_rank<decltype(tag)>(c, params, pp, checks); });
        break;
      case Command::kDofTable:
        results = run_dof_table(c, checks, c.format == OutputFormat::kCsv ? &csv : nullptr);
        break;
      case Command::kSimulate:
        results = with_ring(c.ring, [&](auto tag) { return run_simulate<decltype(tag)>(c, params, pp, checks); });
        break;
    }
    bool passed = true;
    for (const auto& ch : checks) passed = passed && ch["status"] != "fail";
    out.exit_code = passed ? 0 : 1;
  } catch (const InvalidArgument& e) {
    out.exit_code = 2;
    error = Json::object({{"kind", "invalid_argument"}, {"message", e.what()}});
  } catch (const ResourceLimit& e) {
    out.exit_code = 3;
    error = Json::object({{"kind", "resource_limit"}, {"message", e.what()}});
  } catch (const DegenerateRealization& e) {
    out.exit_code = 1;
    error = Json::object({{"kind", "degenerate_realization"}, {"message", e.what()}});
  } catch (const InternalError& e) {
    out.exit_code = 1;
    error = Json::object({{"kind", "internal_error"}, {"message", e.what()}});
  }

  report["status"] = out.exit_code == 0 ? "pass" : (out.exit_code == 1 ? "fail" : "error");
  report["checks"] = checks;
  if (!results.empty()) report["results"] = std::move(results);
  if (!error.is_null()) report["error"] = std::move(error);
  Json timings = Json::object();
  if (c.timings) {
    timings["total_seconds"] =
        format_double(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  report["timings"] = std::move(timings);
  out.report = std::move(report);
  out.rendered = (c.format == OutputFormat::kCsv && out.exit_code <= 1) ? csv : out.report.dump(2) + "\n";
  return out;
}

int run_main(int argc, const char* const* argv) {
  const char* env = std::getenv(kMemoryBudgetEnv);
  const auto parsed = parse_config(argc, argv, env ? std::optional<std::string>(env) : std::nullopt);
  if (!parsed.config) {
    (parsed.exit_code == 0 ? std::cout : std::cerr) << parsed.message;
    return parsed.exit_code;
  }
  const auto result = execute(*parsed.config);
  if (result.report.contains("error")) std::cerr << "error: " << result.report["error"]["message"].get<std::string>() << "\n";
  if (parsed.config->output.empty()) {
    std::cout << result.rendered;
  } else {
    std::ofstream file(parsed.config->output, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot write " << parsed.config->output << "\n";
      return 2;
    }
    file << result.rendered;
  }
  return result.exit_code;
}

}  // namespace siasim::cli

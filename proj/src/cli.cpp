#include "opnkit/cli.hpp"

#include "opnkit/bang.hpp"
#include "opnkit/canonical_json.hpp"
#include "opnkit/diophantine.hpp"
#include "opnkit/errors.hpp"
#include "opnkit/opn_model.hpp"
#include "opnkit/version.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace opnkit {
namespace {

struct Outcome {
  Json payload;
  std::optional<std::string> csv;
  int exit_code = kExitOk;
  Json parameter_box = Json::object();
  unsigned workers = 1;
};

using Handler = std::function<Outcome()>;

Natural arg(const std::string& text, const char* what) {
  try {
    return parse_natural(text);
  } catch (const DomainError& e) {
    throw DomainError(std::string(what) + ": " + e.what());
  }
}

unsigned long arg_ulong(const std::string& text, const char* what) { return to_ulong_checked(arg(text, what), what); }

std::vector<OpnCandidate> load_candidates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read candidate file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DomainError("candidate file '" + path + "' is not valid JSON: " + e.what());
  }
  return decode_candidates(j);
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

unsigned default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact arithmetic and certificate tooling for odd perfect number constraints", "opnkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolkitVersion));

  bool csv = false;
  std::string out_path;
  app.add_flag("--csv", csv, "Write CSV instead of JSON where the command has a tabular form");
  app.add_option("--out", out_path, "Write the payload to FILE (plus a FILE.manifest.json sidecar)");

  Handler handler;

  // factor N
  std::string n_text, q_text, p_text, a_text, m_text;
  auto* factor = app.add_subcommand("factor", "Prime factorization of N");
  factor->add_option("N", n_text)->required();
  factor->callback([&] {
    handler = [&] {
      const Natural n = arg(n_text, "N");
      const Factorization f = factorize(n);
      Outcome o;
      o.payload = {{"n", encode(n)}, {"factorization", encode(f)}};
      std::string rows = "p,e\n";
      for (const auto& pp : f.pairs()) rows += pp.prime.get_str() + "," + pp.exponent.get_str() + "\n";
      o.csv = rows;
      return o;
    };
  });

  auto* sigma_cmd = app.add_subcommand("sigma", "Sum of divisors of N");
  sigma_cmd->add_option("N", n_text)->required();
  sigma_cmd->callback([&] {
    handler = [&] {
      const Natural n = arg(n_text, "N");
      const Factorization f = factorize(n);
      Outcome o;
      o.payload = {{"n", encode(n)}, {"factorization", encode(f)}, {"sigma", encode(sigma(f))},
                   {"is_perfect", sigma(f) == 2 * n}};
      return o;
    };
  });

  auto* index_cmd = app.add_subcommand("index", "sigma(N/q^alpha)/q^alpha for q^alpha || N");
  index_cmd->add_option("N", n_text)->required();
  index_cmd->add_option("q", q_text)->required();
  index_cmd->callback([&] {
    handler = [&] {
      Outcome o;
      o.payload = encode(index_statistic(arg(n_text, "N"), arg(q_text, "q")));
      return o;
    };
  });

  auto* order_cmd = app.add_subcommand("order", "Multiplicative order of p modulo n");
  order_cmd->add_option("p", p_text)->required();
  order_cmd->add_option("n", n_text)->required();
  order_cmd->callback([&] {
    handler = [&] {
      const Natural p = arg(p_text, "p"), n = arg(n_text, "n");
      Outcome o;
      o.payload = {{"p", encode(p)}, {"n", encode(n)}, {"order", encode(mult_order(p, n))}};
      return o;
    };
  });

  auto* zp_cmd = app.add_subcommand("zp", "z_p(m), the least n with m | repunit(p, n) up to the congruent case");
  zp_cmd->add_option("p", p_text)->required();
  zp_cmd->add_option("m", m_text)->required();
  zp_cmd->callback([&] {
    handler = [&] {
      Outcome o;
      o.payload = encode(z_composite(arg(p_text, "p"), arg(m_text, "m")));
      return o;
    };
  });

  auto* bang_cmd = app.add_subcommand("bang", "Primitive prime divisors of a^n - 1");
  bang_cmd->add_option("a", a_text)->required();
  bang_cmd->add_option("n", n_text)->required();
  bang_cmd->callback([&] {
    handler = [&] {
      Outcome o;
      o.payload = encode(primitive_prime_divisors(arg(a_text, "a"), arg_ulong(n_text, "n"), default_factor_options()));
      return o;
    };
  });

  std::string pmax_text, lmax_text;
  auto* solve_cmd = app.add_subcommand("solve-repunit", "All repunit(p, lambda+1) = m q^beta in a box");
  solve_cmd->add_option("--m", m_text)->required();
  solve_cmd->add_option("--pmax", pmax_text)->required();
  solve_cmd->add_option("--lmax", lmax_text)->required();
  solve_cmd->callback([&] {
    handler = [&] {
      const Natural m = arg(m_text, "--m");
      const RepunitBounds bounds{arg(pmax_text, "--pmax"), arg_ulong(lmax_text, "--lmax")};
      const auto sols = solve_repunit_mq(m, bounds);
      Outcome o;
      o.parameter_box = {{"m", encode(m)}, {"p_max", encode(bounds.p_max)}, {"lambda_max", lmax_text}};
      Json list = Json::array();
      for (const auto& s : sols) list.push_back(encode(s));
      o.payload = {{"parameters", o.parameter_box}, {"solutions", list}};
      o.csv = solutions_csv(sols);
      return o;
    };
  });

  std::string lambda_text, pbound_text;
  bool square_base = false;
  auto* refute_cmd = app.add_subcommand("refute", "Residue-class refutation of repunit(p, lambda+1) = q^beta");
  refute_cmd->add_option("--lambda", lambda_text)->required();
  refute_cmd->add_option("--q", q_text)->required();
  refute_cmd->add_option("--pbound", pbound_text)->required();
  refute_cmd->add_flag("--square-base", square_base, "Read the right-hand side as (q^2)^beta");
  refute_cmd->callback([&] {
    handler = [&] {
      const auto cert = refute_prime_power_eq(arg_ulong(lambda_text, "--lambda"), arg(q_text, "--q"),
                                              arg(pbound_text, "--pbound"),
                                              square_base ? PowerReading::square_base : PowerReading::prime_power);
      Outcome o;
      o.parameter_box = {{"lambda", lambda_text}, {"q", q_text}, {"p_bound", pbound_text},
                         {"reading", to_string(cert.reading)}};
      o.payload = encode(cert);
      std::string rows = "residue,valuation,undetermined\n";
      for (const auto& r : cert.residue_table) {
        rows += r.residue.get_str() + "," + std::to_string(r.valuation) + "," + (r.undetermined ? "true" : "false") +
                "\n";
      }
      o.csv = rows;
      if (cert.conclusion == RefutationConclusion::solutions_listed) o.exit_code = kExitFindings;
      return o;
    };
  });

  std::string beta_text;
  std::optional<std::string> alpha_text;
  auto* lemma2_cmd = app.add_subcommand("lemma2", "alpha + 1 divisibility forced by a pure component");
  lemma2_cmd->add_option("--p", p_text)->required();
  lemma2_cmd->add_option("--lambda", lambda_text)->required();
  lemma2_cmd->add_option("--q", q_text)->required();
  lemma2_cmd->add_option("--beta", beta_text)->required();
  lemma2_cmd->add_option("--alpha", alpha_text);
  lemma2_cmd->callback([&] {
    handler = [&] {
      const RepunitSolution sol{arg(p_text, "--p"), arg_ulong(lambda_text, "--lambda"), Natural(1),
                                arg(q_text, "--q"), arg_ulong(beta_text, "--beta")};
      Outcome o;
      o.payload = {{"solution", encode(sol)}, {"required_divisor_of_alpha_plus_1", encode(pure_component_alpha_modulus(sol))}};
      if (alpha_text) {
        const unsigned long alpha = arg_ulong(*alpha_text, "--alpha");
        o.payload["alpha"] = std::to_string(alpha);
        o.payload["p_lambda_divides_repunit"] = pure_component_condition_holds(sol, sol.q, alpha);
      } else {
        o.payload["alpha"] = nullptr;
        o.payload["p_lambda_divides_repunit"] = nullptr;
      }
      return o;
    };
  });

  std::string k_text, gamma_text;
  unsigned workers = default_workers();
  auto* search_cmd = app.add_subcommand("search-t2", "Exhaustive search for repunit(p, lambda+1) = q^beta");
  search_cmd->add_option("--K", k_text)->required();
  search_cmd->add_option("--Gamma", gamma_text)->required();
  search_cmd->add_option("--pbound", pbound_text)->required();
  search_cmd->add_option("--workers", workers)->check(CLI::PositiveNumber);
  search_cmd->callback([&] {
    handler = [&] {
      const SearchBox box{arg(k_text, "--K"), arg_ulong(gamma_text, "--Gamma"), arg(pbound_text, "--pbound")};
      const auto cert = bounded_prime_power_search(box, workers);
      Outcome o;
      o.parameter_box = encode(box);
      o.workers = workers;
      o.payload = encode(cert);
      o.csv = solutions_csv(cert.solutions);
      if (!cert.solutions.empty()) o.exit_code = kExitFindings;
      return o;
    };
  });

  std::string candidate_path;
  auto* decompose_cmd = app.add_subcommand("decompose", "Split each sigma(p^lambda) into m q^beta");
  decompose_cmd->add_option("--candidate", candidate_path)->required();
  decompose_cmd->callback([&] {
    handler = [&] {
      Outcome o;
      Json results = Json::array();
      for (const auto& c : load_candidates(candidate_path)) {
        results.push_back({{"candidate", encode(c)}, {"decomposition", encode(decompose(c))}});
      }
      o.payload = {{"results", results}};
      return o;
    };
  });

  unsigned long min_s = SieveConfig{}.min_s;
  std::optional<std::string> sieve_k;
  auto* sieve_cmd = app.add_subcommand("sieve", "Check every necessary condition on candidates");
  sieve_cmd->add_option("--candidate", candidate_path)->required();
  sieve_cmd->add_option("--min-s", min_s);
  sieve_cmd->add_option("--K", sieve_k, "Upper bound on the index for the index-class check");
  sieve_cmd->callback([&] {
    handler = [&] {
      SieveConfig config;
      config.min_s = min_s;
      if (sieve_k) config.K = arg(*sieve_k, "--K");
      Outcome o;
      Json results = Json::array();
      std::string rows = "candidate,constraint_id,detail,anchor\n";
      std::size_t index = 0;
      for (const auto& c : load_candidates(candidate_path)) {
        const auto report = candidate_check(c, config);
        if (report.violated) o.exit_code = kExitFindings;
        for (const auto& v : report.violations) {
          rows += std::to_string(index) + "," + quote_csv(v.constraint_id) + "," + quote_csv(v.detail) + "," +
                  quote_csv(v.anchor) + "\n";
        }
        results.push_back({{"candidate", encode(c)}, {"report", encode(report)}});
        ++index;
      }
      o.parameter_box = {{"min_s", std::to_string(min_s)}, {"K", sieve_k ? Json(*sieve_k) : Json(nullptr)}};
      o.payload = {{"config", o.parameter_box}, {"results", results}};
      o.csv = rows;
      return o;
    };
  });

  auto* bounds_cmd = app.add_subcommand("bounds", "Exponent, alpha and threshold bounds for candidates");
  bounds_cmd->add_option("--candidate", candidate_path)->required();
  bounds_cmd->callback([&] {
    handler = [&] {
      Outcome o;
      Json results = Json::array();
      for (const auto& c : load_candidates(candidate_path)) {
        const Decomposition d = decompose(c);
        Json r = {{"candidate", encode(c)}, {"decomposition", encode(d)}, {"bounds", encode(bound_report(d))}};
        r["small_index_chain"] = d.m <= 5 ? encode(small_index_q_classifier(d)) : Json(nullptr);
        results.push_back(std::move(r));
      }
      o.payload = {{"results", results}};
      return o;
    };
  });

  std::string mersenne_list;
  auto* scan_cmd = app.add_subcommand("scan-even-perfect", "Index statistic on even perfect numbers");
  scan_cmd->add_option("--mersenne-exponents", mersenne_list, "Comma-separated exponents p with 2^p - 1 prime")
      ->required();
  scan_cmd->callback([&] {
    handler = [&] {
      Outcome o;
      Json rows = Json::array();
      std::string table = "exponent,q,value\n";
      std::stringstream ss(mersenne_list);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const unsigned long p = arg_ulong(item, "--mersenne-exponents");
        const Natural mersenne = pow(Natural(2), p) - 1;
        if (p < 2 || !is_prime(mersenne)) throw DomainError("2^" + item + " - 1 is not prime");
        const Natural N = pow(Natural(2), p - 1) * mersenne;
        for (const Natural& q : {Natural(2), mersenne}) {
          const IndexReport r = index_statistic(N, q);
          rows.push_back({{"exponent", std::to_string(p)}, {"report", encode(r)}});
          table += std::to_string(p) + "," + q.get_str() + "," + r.value.to_string() + "\n";
        }
      }
      o.payload = {{"rows", rows}};
      o.csv = table;
      return o;
    };
  });

  std::string mmax_text;
  std::optional<std::string> qmax_text;
  auto* lemma1_cmd = app.add_subcommand("verify-lemma1", "Check lambda + 1 <= m^2 on every solution in a box");
  lemma1_cmd->add_option("--pmax", pmax_text)->required();
  lemma1_cmd->add_option("--lmax", lmax_text, "Largest lambda")->required();
  lemma1_cmd->add_option("--mmax", mmax_text)->required();
  lemma1_cmd->add_option("--qmax", qmax_text, "Largest q (defaults to --pmax)");
  lemma1_cmd->callback([&] {
    handler = [&] {
      const Natural pmax = arg(pmax_text, "--pmax");
      const Natural qmax = qmax_text ? arg(*qmax_text, "--qmax") : pmax;
      const unsigned long lmax = arg_ulong(lmax_text, "--lmax");
      const unsigned long mmax = arg_ulong(mmax_text, "--mmax");
      Outcome o;
      Json checked = Json::array(), violations = Json::array();
      std::vector<RepunitSolution> all;
      for (unsigned long m = 2; m <= mmax; ++m) {
        for (const auto& s : solve_repunit_mq(Natural(m), {pmax, lmax})) {
          if (s.q > qmax) continue;
          const auto verdict = exponent_bound_check(s);
          Json row = {{"solution", encode(s)}, {"verdict", encode(verdict)}};
          if (verdict.contradiction) violations.push_back(row);
          checked.push_back(std::move(row));
          all.push_back(s);
        }
      }
      o.parameter_box = {{"p_max", encode(pmax)}, {"q_max", encode(qmax)}, {"lambda_max", std::to_string(lmax)},
                         {"m_max", std::to_string(mmax)}};
      o.payload = {{"parameters", o.parameter_box}, {"checked", checked}, {"violations", violations}};
      o.csv = solutions_csv(all);
      if (!violations.empty()) o.exit_code = kExitFindings;
      return o;
    };
  });

  auto* threshold_cmd = app.add_subcommand("m-threshold", "Largest M with (sqrt(M) - 27) ln 3 < 26 ln(20 M)");
  threshold_cmd->callback([&] {
    handler = [&] {
      const Natural m = m_threshold_solver();
      Outcome o;
      o.payload = {{"M_max", encode(m)},
                   {"holds_at_M_max", m_threshold_predicate(m)},
                   {"holds_at_M_max_plus_1", m_threshold_predicate(m + 1)}};
      return o;
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Outcome o = handler();
    std::string bytes;
    if (csv) {
      if (!o.csv) throw DomainError("this command has no CSV form");
      bytes = *o.csv;
    } else {
      bytes = canonical_dump(o.payload);
    }
    if (out_path.empty()) {
      out << bytes;
    } else {
      RunManifest manifest;
      manifest.started = utc_timestamp();
      manifest.command_line.push_back("opnkit");
      manifest.command_line.insert(manifest.command_line.end(), args.begin(), args.end());
      manifest.toolkit_version = kToolkitVersion;
      manifest.parameter_box = o.parameter_box;
      manifest.workers = o.workers;
      std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
      if (!file) throw OutputError("cannot open '" + out_path + "' for writing");
      file << bytes;
      file.close();
      if (!file) throw OutputError("failed writing '" + out_path + "'");
      manifest.output_digest = sha256_hex(bytes);
      manifest.finished = utc_timestamp();
      persist_manifest(manifest, out_path);
    }
    return o.exit_code;
  } catch (const InconsistencyError& e) {
    err << "internal inconsistency: " << e.what() << "\n";
    return kExitInconsistent;
  } catch (const RefusalError& e) {
    err << "refused: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace opnkit

#include "opnkit/canonical_json.hpp"
#include "opnkit/errors.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace opnkit {
namespace {

std::string str(unsigned long v) { return std::to_string(v); }

Json encode_interval_pair(const RationalInterval& i) { return encode(i); }

Json certainty(Certainty c) {
  switch (c) {
    case Certainty::yes:
      return "yes";
    case Certainty::no:
      return "no";
    case Certainty::undecided:
      return "undecided";
  }
  return "undecided";
}

Json encode_log2_power(const Log2Power& p) {
  return {{"base", encode(p.base)}, {"exponent", encode(p.exponent)}, {"log2", encode_interval_pair(p.log2_value)}};
}

Natural read_natural(const Json& j, const char* what) {
  if (j.is_string()) return parse_natural(j.get<std::string>());
  if (j.is_number_unsigned()) return Natural(std::to_string(j.get<std::uint64_t>()));
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw DomainError(std::string(what) + " must be nonnegative");
    return Natural(std::to_string(v));
  }
  throw DomainError(std::string(what) + " must be an integer or a decimal string");
}

unsigned long read_ulong(const Json& j, const char* what) { return to_ulong_checked(read_natural(j, what), what); }

}  // namespace

Json encode(const Natural& n) { return n.get_str(); }

Json encode(const Factorization& f) {
  Json out = Json::array();
  for (const auto& pp : f.pairs()) out.push_back({{"p", encode(pp.prime)}, {"e", encode(pp.exponent)}});
  return out;
}

Json encode(const ExactRational& r) { return r.to_string(); }

Json encode(const RationalInterval& i) { return {{"lo", rational_string(i.lo)}, {"hi", rational_string(i.hi)}}; }

Json encode(const BangWitness& w) {
  Json primes = Json::array();
  for (const auto& p : w.primitive_primes) primes.push_back(encode(p));
  return {{"a", encode(w.a)},
          {"n", str(w.n)},
          {"exists", w.exists},
          {"primitive_primes", primes},
          {"value_bits", str(w.value_bits)},
          {"primitive_part_bits", str(w.primitive_part_bits)}};
}

Json encode(const ZOrderSpec& z) {
  Json terms = Json::array();
  for (const auto& t : z.per_prime_power) {
    terms.push_back({{"r", encode(t.r)},
                     {"delta", str(t.delta)},
                     {"prime_power", encode(t.prime_power)},
                     {"z", encode(t.z)},
                     {"branch", to_string(t.branch)}});
  }
  return {{"p", encode(z.p)}, {"m", encode(z.m)}, {"z_value", encode(z.z_value)}, {"per_prime_power", terms}};
}

Json encode(const RepunitSolution& s) {
  return {{"p", encode(s.p)}, {"lambda", str(s.lambda)}, {"m", encode(s.m)}, {"q", encode(s.q)},
          {"beta", str(s.beta)}};
}

Json encode(const ExponentBoundVerdict& v) {
  return {{"applicable", v.applicable},
          {"holds", v.holds},
          {"inequality", v.inequality},
          {"contradiction", v.contradiction},
          {"reason", v.reason}};
}

Json encode(const RefutationCertificate& c) {
  Json table = Json::array();
  for (const auto& row : c.residue_table) {
    table.push_back({{"residue", encode(row.residue)}, {"valuation", str(row.valuation)},
                     {"undetermined", row.undetermined}});
  }
  Json checks = Json::array();
  for (const auto& check : c.residual_checks) {
    Json j = {{"beta", str(check.beta)},
              {"target", encode(check.target)},
              {"eliminated", check.eliminated},
              {"outcome", check.outcome}};
    j["solution_p"] = check.solution_p ? encode(*check.solution_p) : Json(nullptr);
    checks.push_back(std::move(j));
  }
  Json sweep_solutions = Json::array();
  for (const auto& p : c.direct_sweep.solutions) sweep_solutions.push_back(encode(p));
  return {{"kind", "refutation-certificate"},
          {"lambda", str(c.lambda)},
          {"q", encode(c.q)},
          {"reading", to_string(c.reading)},
          {"beta_cap", c.capped ? Json(str(c.beta_cap)) : Json(nullptr)},
          {"capped", c.capped},
          {"residue_modulus", encode(c.q * c.q)},
          {"residue_table", table},
          {"residual_checks", checks},
          {"direct_sweep",
           {{"p_bound", encode(c.direct_sweep.p_bound)},
            {"primes_checked", str(c.direct_sweep.primes_checked)},
            {"max_valuation", str(c.direct_sweep.max_valuation)},
            {"solutions", sweep_solutions}}},
          {"conclusion", to_string(c.conclusion)}};
}

Json encode(const SearchBox& b) {
  return {{"K", encode(b.K)}, {"Gamma", str(b.gamma)}, {"p_bound", encode(b.p_bound)}};
}

Json encode(const SearchCertificate& c) {
  Json sols = Json::array();
  for (const auto& s : c.solutions) sols.push_back(encode(s));
  return {{"kind", "search-certificate"},
          {"parameter_box", encode(c.parameter_box)},
          {"solutions", sols},
          {"exhaustive", c.exhaustive},
          {"cells_enumerated", str(c.cells_enumerated)},
          {"toolkit_version", c.toolkit_version}};
}

Json encode(const OpnCandidate& c) {
  Json comps = Json::array();
  for (const auto& comp : c.components) comps.push_back({{"p", encode(comp.p)}, {"lambda", str(comp.lambda)}});
  return {{"q", encode(c.q)},
          {"components", comps},
          {"alpha", c.alpha ? Json(str(*c.alpha)) : Json(nullptr)},
          {"complete", c.complete}};
}

Json encode(const Decomposition& d) {
  Json entries = Json::array();
  for (const auto& e : d.entries) {
    entries.push_back({{"p", encode(e.p)}, {"lambda", str(e.lambda)}, {"m", encode(e.m)}, {"beta", str(e.beta)}});
  }
  return {{"q", encode(d.q)},     {"entries", entries},         {"k", str(d.k)},
          {"s", str(d.s())},      {"m", encode(d.m)},           {"M", encode(d.M)},
          {"Lambda", encode(d.Lambda)}, {"alpha", str(d.alpha)}};
}

Json encode(const IndexReport& r) {
  return {{"N", encode(r.N)},
          {"q", encode(r.q)},
          {"alpha", str(r.alpha)},
          {"value", encode(r.value)},
          {"is_integer", r.is_integer},
          {"divides_2N", r.divides_2N},
          {"is_perfect_input", r.is_perfect_input}};
}

Json encode(const BetaBounds& b) {
  Json checks = Json::array();
  for (const auto& c : b.checks) {
    checks.push_back({{"index", str(c.index)},
                      {"p", encode(c.p)},
                      {"beta", str(c.beta)},
                      {"log2_q_power", encode(c.log2_q_power)},
                      {"bound", encode_log2_power(c.bound)},
                      {"small_index_bound", encode_log2_power(c.small_index_bound)},
                      {"below_bound", certainty(c.below_bound)}});
  }
  return {{"branch", to_string(b.branch)},
          {"checks", checks},
          {"four_divides_2M_q_minus_1", b.four_divides_2M_q_minus_1},
          {"four_divides_m", b.four_divides_m}};
}

Json encode(const BoundReport& r) {
  return {{"beta_bounds", encode(r.beta)},
          {"heath_brown_log2", encode(r.heath_brown_log2)},
          {"alpha_floor",
           {{"required_divisor", encode(r.alpha_floor.required_divisor)}, {"floor", encode(r.alpha_floor.floor)}}},
          {"m_threshold", encode(r.m_threshold)}};
}

Json encode(const QClassification& q) {
  Json trace = Json::array();
  for (const auto& step : q.chain_trace) {
    trace.push_back({{"name", step.name}, {"detail", step.detail}, {"contradiction", step.contradiction}});
  }
  return {{"forced_q_in_3_5", q.forced_q_in_3_5},
          {"rejected", q.rejected},
          {"M_bound_used", encode(q.M_bound_used)},
          {"chain_trace", trace}};
}

Json encode(const ViolationReport& r) {
  Json vs = Json::array();
  for (const auto& v : r.violations) {
    vs.push_back({{"constraint_id", v.constraint_id}, {"detail", v.detail}, {"anchor", v.anchor}});
  }
  return {{"violated", r.violated}, {"violations", vs}};
}

OpnCandidate decode_candidate(const Json& j) {
  if (!j.is_object()) throw DomainError("candidate must be a JSON object");
  if (!j.contains("q") || !j.contains("components")) throw DomainError("candidate needs 'q' and 'components'");
  OpnCandidate c;
  c.q = read_natural(j.at("q"), "q");
  const Json& comps = j.at("components");
  if (!comps.is_array()) throw DomainError("'components' must be an array");
  for (const Json& comp : comps) {
    if (comp.is_array() && comp.size() == 2) {
      c.components.push_back({read_natural(comp[0], "p"), read_ulong(comp[1], "lambda")});
    } else if (comp.is_object() && comp.contains("p") && comp.contains("lambda")) {
      c.components.push_back({read_natural(comp.at("p"), "p"), read_ulong(comp.at("lambda"), "lambda")});
    } else {
      throw DomainError("component must be {\"p\", \"lambda\"} or [p, lambda]");
    }
  }
  if (j.contains("alpha") && !j.at("alpha").is_null()) c.alpha = read_ulong(j.at("alpha"), "alpha");
  if (j.contains("complete")) {
    if (!j.at("complete").is_boolean()) throw DomainError("'complete' must be a boolean");
    c.complete = j.at("complete").get<bool>();
  }
  validate(c);
  return c;
}

std::vector<OpnCandidate> decode_candidates(const Json& j) {
  std::vector<OpnCandidate> out;
  if (j.is_array()) {
    for (const Json& item : j) out.push_back(decode_candidate(item));
  } else {
    out.push_back(decode_candidate(j));
  }
  return out;
}

std::string canonical_dump(const Json& payload) { return payload.dump(2) + "\n"; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

Json encode(const RunManifest& m) {
  return {{"command_line", m.command_line},
          {"toolkit_version", m.toolkit_version},
          {"parameter_box", m.parameter_box},
          {"started", m.started},
          {"finished", m.finished},
          {"workers", str(m.workers)},
          {"output_digest", m.output_digest}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot open '" + path + "' for writing");
  out << bytes;
  out.flush();
  if (!out) throw OutputError("failed writing '" + path + "'");
}

}  // namespace

std::string persist_certificate(const Json& payload, const std::string& path) {
  const std::string bytes = canonical_dump(payload);
  write_file(path, bytes);
  return sha256_hex(bytes);
}

std::string manifest_path(const std::string& path) { return path + ".manifest.json"; }

void persist_manifest(const RunManifest& m, const std::string& payload_path) {
  write_file(manifest_path(payload_path), canonical_dump(encode(m)));
}

std::string solutions_csv(const std::vector<RepunitSolution>& solutions) {
  std::ostringstream out;
  out << "p,lambda,m,q,beta\n";
  for (const auto& s : solutions) {
    out << s.p.get_str() << ',' << s.lambda << ',' << s.m.get_str() << ',' << s.q.get_str() << ',' << s.beta << '\n';
  }
  return out.str();
}

}  // namespace opnkit

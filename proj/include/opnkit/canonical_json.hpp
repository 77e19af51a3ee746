#pragma once

#include "opnkit/arith.hpp"
#include "opnkit/bang.hpp"
#include "opnkit/diophantine.hpp"
#include "opnkit/log_bounds.hpp"
#include "opnkit/opn_model.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace opnkit {

// nlohmann::json keeps object keys in a std::map, so dumps are key-sorted.
using Json = nlohmann::json;

// Every integer is emitted as a decimal string; rationals as "num/den".
Json encode(const Natural& n);
Json encode(const Factorization& f);
Json encode(const ExactRational& r);
Json encode(const RationalInterval& i);
Json encode(const BangWitness& w);
Json encode(const ZOrderSpec& z);
Json encode(const RepunitSolution& s);
Json encode(const ExponentBoundVerdict& v);
Json encode(const RefutationCertificate& c);
Json encode(const SearchBox& b);
Json encode(const SearchCertificate& c);
Json encode(const OpnCandidate& c);
Json encode(const Decomposition& d);
Json encode(const IndexReport& r);
Json encode(const BetaBounds& b);
Json encode(const BoundReport& r);
Json encode(const QClassification& q);
Json encode(const ViolationReport& r);

/// Accepts a single candidate object or an array of them. Integers may be
/// JSON numbers or decimal strings. Components are objects {"p", "lambda"}
/// or pairs [p, lambda]. Throws DomainError on malformed input.
std::vector<OpnCandidate> decode_candidates(const Json& j);
OpnCandidate decode_candidate(const Json& j);

/// Sorted keys, two-space indent, trailing newline.
std::string canonical_dump(const Json& payload);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);

struct RunManifest {
  std::vector<std::string> command_line;
  std::string toolkit_version;
  Json parameter_box = Json::object();
  std::string started;
  std::string finished;
  unsigned workers = 1;
  std::string output_digest;
};

Json encode(const RunManifest& m);

/// UTC, ISO 8601, second resolution.
std::string utc_timestamp();

/// Writes the canonical dump of payload to path and returns its digest.
/// Throws OutputError if the file cannot be written.
std::string persist_certificate(const Json& payload, const std::string& path);

/// The sidecar path for a payload written to path.
std::string manifest_path(const std::string& path);

/// Writes the manifest beside the payload (see manifest_path).
void persist_manifest(const RunManifest& m, const std::string& payload_path);

/// Header p,lambda,m,q,beta, then one row per solution.
std::string solutions_csv(const std::vector<RepunitSolution>& solutions);

}  // namespace opnkit

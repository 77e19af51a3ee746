#include "opnkit/canonical_json.hpp"
#include "opnkit/errors.hpp"

#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace opnkit;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("opnkit_test_" + name)).string();
}

// Fails if any number (integer or float) appears anywhere in the document.
bool numbers_free(const Json& j) {
  if (j.is_number()) return false;
  if (j.is_array() || j.is_object()) {
    for (const auto& v : j) {
      if (!numbers_free(v)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("sha256 of known strings") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("canonical dump sorts keys and ends with a newline") {
  const Json j = {{"zeta", "1"}, {"alpha", "2"}, {"mid", {{"b", "x"}, {"a", "y"}}}};
  const std::string s = canonical_dump(j);
  CHECK(s.find("\"alpha\"") < s.find("\"mid\""));
  CHECK(s.find("\"mid\"") < s.find("\"zeta\""));
  CHECK(s.find("\"a\"") < s.find("\"b\""));
  CHECK(s.back() == '\n');
}

TEST_CASE("certificates carry integers as strings and no floats") {
  const auto search = bounded_prime_power_search({13, 2, 10});
  const Json js = encode(search);
  CHECK(numbers_free(js));
  CHECK(js["parameter_box"]["K"] == "13");
  CHECK(js["solutions"][0]["q"] == "13");

  const Json jr = encode(refute_prime_power_eq(2, 3, 1000));
  CHECK(numbers_free(jr));
  CHECK(jr["conclusion"] == "no-solutions");
  CHECK(jr["beta_cap"] == "1");

  OpnCandidate c;
  c.q = 3;
  c.components = {{5, 1}};
  const Json jb = encode(bound_report(decompose(c)));
  CHECK(numbers_free(jb));
  const std::string lo = jb["beta_bounds"]["checks"][0]["bound"]["log2"]["lo"];
  CHECK(lo.find('/') != std::string::npos);
}

TEST_CASE("big integers survive serialization") {
  const Natural big("123456789012345678901234567890");
  CHECK(encode(big) == "123456789012345678901234567890");
}

TEST_CASE("candidate decoding") {
  const Json one = Json::parse(R"({"q": 3, "components": [{"p": 5, "lambda": 1}, [7, "2"]], "alpha": "4"})");
  const auto c = decode_candidate(one);
  CHECK(c.q == 3);
  REQUIRE(c.components.size() == 2);
  CHECK(c.components[1].p == 7);
  CHECK(c.components[1].lambda == 2);
  CHECK(c.alpha == 4UL);
  CHECK_FALSE(c.complete);

  const Json many = Json::parse(R"([{"q": "13", "components": [[3, 2]], "complete": true}, {"q": 3, "components": [[5, 1]]}])");
  const auto cs = decode_candidates(many);
  CHECK(cs.size() == 2);
  CHECK(cs[0].complete);
  CHECK_FALSE(cs[0].alpha.has_value());

  CHECK_THROWS_AS(decode_candidate(Json::parse(R"({"q": 3})")), DomainError);
  CHECK_THROWS_AS(decode_candidate(Json::parse(R"({"q": 4, "components": [[5, 1]]})")), DomainError);
  CHECK_THROWS_AS(decode_candidate(Json::parse(R"({"q": 3, "components": [[5, -1]]})")), DomainError);
  CHECK_THROWS_AS(decode_candidate(Json::parse(R"({"q": 3.5, "components": [[5, 1]]})")), DomainError);

  // Round trip through the encoder.
  const auto back = decode_candidate(encode(c));
  CHECK(back.q == c.q);
  CHECK(back.components == c.components);
  CHECK(back.alpha == c.alpha);
}

TEST_CASE("persisted certificates are reproducible") {
  const std::string a = temp_path("a.json"), b = temp_path("b.json");
  const Json payload = encode(bounded_prime_power_search({31, 4, 500}));
  const std::string da = persist_certificate(payload, a);
  const std::string db = persist_certificate(encode(bounded_prime_power_search({31, 4, 500}, 3)), b);
  CHECK(da == db);
  CHECK(read_file(a) == read_file(b));
  CHECK(sha256_hex(read_file(a)) == da);

  Json changed = payload;
  changed["solutions"][0]["beta"] = "7";
  CHECK(sha256_hex(canonical_dump(changed)) != da);

  RunManifest m;
  m.command_line = {"opnkit", "search-t2"};
  m.toolkit_version = "test";
  m.started = utc_timestamp();
  m.finished = utc_timestamp();
  m.output_digest = da;
  persist_manifest(m, a);
  const Json mj = Json::parse(read_file(manifest_path(a)));
  CHECK(mj["output_digest"] == da);
  CHECK(mj["started"].get<std::string>().size() == 20);

  std::filesystem::remove(a);
  std::filesystem::remove(b);
  std::filesystem::remove(manifest_path(a));
}

TEST_CASE("unwritable paths are reported") {
  CHECK_THROWS_AS(persist_certificate(Json::object(), "/nonexistent-dir/x/y.json"), OutputError);
}

TEST_CASE("solutions CSV") {
  const auto cert = bounded_prime_power_search({13, 2, 10});
  const std::string csv = solutions_csv(cert.solutions);
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "p,lambda,m,q,beta");
  std::size_t rows = 0;
  while (std::getline(in, row)) ++rows;
  CHECK(rows == cert.solutions.size());
  CHECK(csv.find("3,2,1,13,1\n") != std::string::npos);
}

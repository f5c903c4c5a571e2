// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <random>

#include "doctest.h"
#include "ksorbit/io.hpp"
#include "test_util.hpp"

using namespace ks;

namespace {

OrbitCandidate sample_orbit() {
  std::mt19937_64 rng(12);
  OrbitCandidate c;
  c.nu = 1.0 / 32.97;
  c.f = 7.0137406029196621;
  c.u = test::random_poly(rng, 5, 4, Parity::kOdd);
  return c;
}

std::filesystem::path scratch(const char* name) {
  return std::filesystem::temp_directory_path() / (std::string("ksorbit_io_") + name);
}

}  // namespace

TEST_CASE("binary round trip is bitwise") {
  const OrbitCandidate c = sample_orbit();
  const auto bytes = orbit_to_binary(c);
  CHECK(std::equal(bytes.begin(), bytes.begin() + 6, kBinaryMagic));
  const OrbitCandidate d = orbit_from_binary(bytes);
  CHECK(d.nu == c.nu);
  CHECK(d.f == c.f);
  CHECK(d.u.to_flat() == c.u.to_flat());
  CHECK(orbit_to_binary(d) == bytes);

  auto broken = bytes;
  broken[5] = 'X';
  CHECK_THROWS_AS(orbit_from_binary(broken), Error);
  broken = bytes;
  broken.pop_back();
  CHECK_THROWS_AS(orbit_from_binary(broken), Error);
}

TEST_CASE("text round trip keeps metadata") {
  const OrbitCandidate c = sample_orbit();
  const std::string t = orbit_to_text(c, {{"command", "solve"}, {"d1", "5"}});
  Metadata m;
  const OrbitCandidate d = orbit_from_text(t, &m);
  CHECK(d.f == c.f);
  CHECK(d.u.to_flat() == c.u.to_flat());
  CHECK(m.at("command") == "solve");
  CHECK_THROWS_AS(orbit_from_text("{\"nu\": 1}"), Error);
  CHECK_THROWS_AS(orbit_from_text("not json"), Error);
}

TEST_CASE("files by extension and content") {
  const OrbitCandidate c = sample_orbit();
  const auto pb = scratch("a.ksorb"), pt = scratch("a.json");
  write_orbit(pb.string(), c);
  write_orbit(pt.string(), c);
  CHECK(read_file(pb.string()).rfind("KSORB1", 0) == 0);
  CHECK(read_orbit(pb.string()).u.to_flat() == c.u.to_flat());
  CHECK(read_orbit(pt.string()).u.to_flat() == c.u.to_flat());
  write_file(pb.string(), "KSORBX garbage");
  try {
    read_orbit(pb.string());
    FAIL("bad magic accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
  }
  std::filesystem::remove(pb);
  std::filesystem::remove(pt);
  try {
    read_orbit(scratch("missing").string());
    FAIL("missing file accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIoError);
  }
}

TEST_CASE("CSV writers") {
  TrigPoly2D u(2, 1, Parity::kOdd);
  u.a(1, 0) = 1.0;
  const std::string h = heatmap_csv(u, 4, 3, {{"k", "v"}});
  CHECK(h.rfind("# k = v\ntheta,x,value\n", 0) == 0);
  CHECK(std::count(h.begin(), h.end(), '\n') == 2 + 12);

  CascadePoint p;
  p.inv_nu = 33.0;
  p.minima = {1.5, 2.5};
  CascadePoint q;
  q.inv_nu = 34.0;
  q.failed = true;
  q.error = "step, underflow";
  const std::string cs = cascade_csv({p, q});
  CHECK(cs.find("inv_nu,count,minima,error\n") == 0);
  CHECK(cs.find("33,2,1.5;2.5,\n") != std::string::npos);
  CHECK(cs.find("step; underflow") != std::string::npos);

  StabilityReport r;
  r.eigenvalues = {{1.0, -2.0}};
  const std::string e = eigenvalues_csv(r);
  CHECK(e.rfind("re,im,abs\n", 0) == 0);
}

TEST_CASE("certificate text is deterministic without timings") {
  ValidationCertificate c;
  c.success = true;
  c.E = 1e-8;
  c.timings = {{"assemble", 1.0}};
  const std::string a = certificate_text(c, {{"command", "validate"}});
  CHECK(a == certificate_text(c, {{"command", "validate"}}));
  CHECK(a.find("time_") == std::string::npos);
  CHECK(a.find("verdict = VALIDATED") != std::string::npos);
  CHECK(certificate_text(c, {}, true).find("time_assemble") != std::string::npos);
  CHECK(format_double(0.1) == "0.10000000000000001");
}

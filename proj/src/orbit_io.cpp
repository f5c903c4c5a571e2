// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "ksorbit/io.hpp"

namespace ks {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put_le(std::vector<unsigned char>& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <class T>
T get_le(const std::vector<unsigned char>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) fail(ErrorCode::kParseError, "orbit binary: truncated file");
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

Parity parse_parity(const std::string& s) {
  if (s == "odd") return Parity::kOdd;
  if (s == "even") return Parity::kEven;
  fail(ErrorCode::kParseError, "orbit: unknown parity '" + s + "'");
}

std::size_t a_count(int d1, int d2, Parity p) {
  const int rows = d1 - (p == Parity::kOdd ? 1 : 0) + 1;
  return static_cast<std::size_t>(rows) * (d2 + 1);
}

std::size_t b_count(int d1, int d2, Parity p) {
  const int rows = d1 - (p == Parity::kOdd ? 1 : 0) + 1;
  return static_cast<std::size_t>(rows) * d2;
}

OrbitCandidate make_orbit(double nu, double f, int d1, int d2, Parity parity, std::vector<double> a,
                          std::vector<double> b) {
  if (d1 < 1 || d2 < 0 || d1 > 100000 || d2 > 100000) fail(ErrorCode::kParseError, "orbit: invalid degrees");
  if (a.size() != a_count(d1, d2, parity) || b.size() != b_count(d1, d2, parity)) {
    fail(ErrorCode::kParseError, "orbit: coefficient count does not match the degrees");
  }
  OrbitCandidate c;
  c.nu = nu;
  c.f = f;
  c.u = TrigPoly2D::from_coeffs(d1, d2, parity, std::move(a), std::move(b));
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kParseError, e.what());
  }
  return c;
}

void append_line(std::string& s, const char* key, const std::string& value) {
  s += key;
  s += " = ";
  s += value;
  s += '\n';
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string metadata_header(const Metadata& meta, const char* prefix) {
  std::string s;
  for (const auto& [k, v] : meta) {
    s += prefix;
    s += k;
    s += " = ";
    s += v;
    s += '\n';
  }
  return s;
}

std::string orbit_to_text(const OrbitCandidate& cand, const Metadata& meta) {
  cand.validate();
  json j;
  j["format"] = "ksorbit-orbit";
  j["version"] = 1;
  j["nu"] = cand.nu;
  j["inv_nu"] = cand.inv_nu();
  j["f"] = cand.f;
  j["period"] = cand.period();
  j["d1"] = cand.u.d1();
  j["d2"] = cand.u.d2();
  j["parity"] = parity_name(cand.u.parity());
  j["coeffs_a"] = std::vector<double>(cand.u.coeffs_a().begin(), cand.u.coeffs_a().end());
  j["coeffs_b"] = std::vector<double>(cand.u.coeffs_b().begin(), cand.u.coeffs_b().end());
  j["metadata"] = json(meta);
  return j.dump(1) + "\n";
}

OrbitCandidate orbit_from_text(const std::string& text, Metadata* meta) {
  json j;
  try {
    j = json::parse(text);
    if (j.value("format", std::string()) != "ksorbit-orbit") {
      fail(ErrorCode::kParseError, "orbit text: missing format tag");
    }
    const auto parity = parse_parity(j.at("parity").get<std::string>());
    OrbitCandidate c = make_orbit(j.at("nu").get<double>(), j.at("f").get<double>(), j.at("d1").get<int>(),
                                  j.at("d2").get<int>(), parity, j.at("coeffs_a").get<std::vector<double>>(),
                                  j.at("coeffs_b").get<std::vector<double>>());
    if (meta && j.contains("metadata")) *meta = j["metadata"].get<Metadata>();
    return c;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, std::string("orbit text: ") + e.what());
  }
}

std::vector<unsigned char> orbit_to_binary(const OrbitCandidate& cand) {
  cand.validate();
  std::vector<unsigned char> out(std::begin(kBinaryMagic), std::end(kBinaryMagic));
  out.push_back(cand.u.parity() == Parity::kOdd ? 0 : 1);
  put_le<std::int32_t>(out, cand.u.d1());
  put_le<std::int32_t>(out, cand.u.d2());
  put_le<double>(out, cand.nu);
  put_le<double>(out, cand.f);
  for (double v : cand.u.coeffs_a()) put_le<double>(out, v);
  for (double v : cand.u.coeffs_b()) put_le<double>(out, v);
  return out;
}

OrbitCandidate orbit_from_binary(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < sizeof kBinaryMagic || std::memcmp(bytes.data(), kBinaryMagic, sizeof kBinaryMagic) != 0) {
    fail(ErrorCode::kParseError, "orbit binary: bad magic");
  }
  std::size_t pos = sizeof kBinaryMagic;
  const auto p = get_le<std::uint8_t>(bytes, pos);
  if (p > 1) fail(ErrorCode::kParseError, "orbit binary: bad parity byte");
  const Parity parity = p == 0 ? Parity::kOdd : Parity::kEven;
  const int d1 = get_le<std::int32_t>(bytes, pos);
  const int d2 = get_le<std::int32_t>(bytes, pos);
  if (d1 < 1 || d2 < 0 || d1 > 100000 || d2 > 100000) fail(ErrorCode::kParseError, "orbit binary: invalid degrees");
  const double nu = get_le<double>(bytes, pos);
  const double f = get_le<double>(bytes, pos);
  std::vector<double> a(a_count(d1, d2, parity)), b(b_count(d1, d2, parity));
  if (bytes.size() - pos != 8 * (a.size() + b.size())) fail(ErrorCode::kParseError, "orbit binary: size mismatch");
  for (double& v : a) v = get_le<double>(bytes, pos);
  for (double& v : b) v = get_le<double>(bytes, pos);
  return make_orbit(nu, f, d1, d2, parity, std::move(a), std::move(b));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
  out << content;
  if (!out) fail(ErrorCode::kIoError, "write failed: " + path);
}

OrbitCandidate read_orbit(const std::string& path, Metadata* meta) {
  const std::string s = read_file(path);
  if (s.size() >= 4 && s.compare(0, 4, "KSOR") == 0) {
    return orbit_from_binary(std::vector<unsigned char>(s.begin(), s.end()));
  }
  return orbit_from_text(s, meta);
}

void write_orbit(const std::string& path, const OrbitCandidate& cand, const Metadata& meta) {
  const bool binary = path.size() >= 6 && path.compare(path.size() - 6, 6, ".ksorb") == 0;
  if (binary) {
    const auto b = orbit_to_binary(cand);
    write_file(path, std::string(b.begin(), b.end()));
  } else {
    write_file(path, orbit_to_text(cand, meta));
  }
}

std::string newton_report_text(const NewtonReport& rep, const Metadata& meta) {
  std::string s = metadata_header(meta);
  append_line(s, "converged", rep.converged ? "true" : "false");
  append_line(s, "stop_reason", rep.stop_reason);
  append_line(s, "iterations", std::to_string(rep.iterates.empty() ? 0 : rep.iterates.size() - 1));
  append_line(s, "final_residual", format_double(rep.final_residual));
  append_line(s, "quadratic_constant", format_double(rep.quadratic_constant));
  append_line(s, "f", format_double(rep.final.f));
  append_line(s, "period", format_double(rep.final.period()));
  append_line(s, "d1", std::to_string(rep.final.u.d1()));
  append_line(s, "d2", std::to_string(rep.final.u.d2()));
  s += "iter residual step\n";
  char buf[96];
  for (std::size_t k = 0; k < rep.iterates.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu %.6e %.6e\n", k, rep.iterates[k].residual, rep.iterates[k].step);
    s += buf;
  }
  return s;
}

std::string certificate_text(const ValidationCertificate& c, const Metadata& meta, bool with_timings) {
  std::string s = "# ksorbit validation certificate\n";
  s += metadata_header(meta);
  auto d = [&](const char* k, double v) { append_line(s, k, format_double(v)); };
  auto i = [&](const char* k, long long v) { append_line(s, k, std::to_string(v)); };
  d("nu", c.nu);
  d("inv_nu", 1.0 / c.nu);
  d("f", c.f);
  d("period", 2.0 * M_PI / c.f);
  d("c", c.c);
  i("d1", c.d1);
  i("d2", c.d2);
  i("dt1", c.dt1);
  i("dt2", c.dt2);
  i("dimension", static_cast<long long>(c.dimension));
  d("weight_r", c.w.r);
  d("weight_s1", c.w.s1);
  d("weight_s2", c.w.s2);
  append_line(s, "k3_mode", k3_mode_name(c.k3));
  append_line(s, "transcendentals", c.transcendental_route);
  d("delta", c.delta);
  d("alpha1", c.alpha1);
  d("K1", c.K1);
  d("K2", c.K2);
  d("K3", c.K3);
  d("alpha2", c.alpha2);
  d("b", c.b);
  d("alpha", c.alpha);
  d("e0", c.e0);
  d("e1", c.e1);
  d("e2", c.e2);
  d("banach_dx", c.banach_dx);
  d("banach_dtheta", c.banach_dtheta);
  d("discriminant", c.discriminant);
  d("rho_minus", c.rho_minus);
  d("E", c.E);
  d("b_condition", c.b_condition);
  d("lipschitz", c.lipschitz);
  if (c.improved) {
    d("r_hat", c.r_hat);
    d("E_r_hat", c.E_r_hat);
  }
  if (with_timings) {
    for (const auto& [name, t] : c.timings) append_line(s, ("time_" + name).c_str(), format_double(t));
  }
  if (c.success) {
    s += "verdict = VALIDATED\n";
  } else {
    append_line(s, "failed_stage", c.failed_stage);
    d("failed_bound", c.failed_bound);
    s += "verdict = FAILED\n";
  }
  return s;
}

std::string stability_report_text(const StabilityReport& mono, const StabilityReport& op,
                                  const StabilityCrossCheck& check, const Metadata& meta) {
  std::string s = metadata_header(meta);
  for (const StabilityReport* r : {&mono, &op}) {
    const std::string p = std::string(stability_method_name(r->method)) + ".";
    append_line(s, (p + "unstable_dimension").c_str(), std::to_string(r->unstable_dimension));
    append_line(s, (p + "marginal").c_str(), std::to_string(r->marginal));
    append_line(s, (p + "eigenvalues").c_str(), std::to_string(r->eigenvalues.size()));
    if (r->method == StabilityMethod::kOperatorSpectrum) {
      append_line(s, (p + "strip_offset").c_str(), format_double(r->strip_offset));
      append_line(s, (p + "d1").c_str(), std::to_string(r->d1));
      append_line(s, (p + "d2").c_str(), std::to_string(r->d2));
    } else {
      append_line(s, (p + "n_x").c_str(), std::to_string(r->n_x));
    }
    const std::size_t lead = std::min<std::size_t>(r->eigenvalues.size(), 6);
    for (std::size_t k = 0; k < lead; ++k) {
      const auto z = r->eigenvalues[k];
      append_line(s, (p + "leading" + std::to_string(k)).c_str(),
                  format_double(z.real()) + " " + format_double(z.imag()));
    }
  }
  append_line(s, "agree", check.agree ? "true" : "false");
  if (!check.agree) append_line(s, "warning", check.warning);
  return s;
}

std::string eigenvalues_csv(const StabilityReport& rep, const Metadata& meta) {
  std::string s = metadata_header(meta);
  s += "re,im,abs\n";
  for (const auto& z : rep.eigenvalues) {
    s += format_double(z.real()) + "," + format_double(z.imag()) + "," + format_double(std::abs(z)) + "\n";
  }
  return s;
}

std::string cascade_csv(const std::vector<CascadePoint>& points, const Metadata& meta) {
  std::string s = metadata_header(meta);
  s += "inv_nu,count,minima,error\n";
  for (const auto& p : points) {
    s += format_double(p.inv_nu) + "," + std::to_string(p.minima.size()) + ",";
    for (std::size_t k = 0; k < p.minima.size(); ++k) {
      if (k) s += ';';
      s += format_double(p.minima[k]);
    }
    s += ",";
    if (p.failed) {
      std::string e = p.error;
      std::replace(e.begin(), e.end(), ',', ';');
      std::replace(e.begin(), e.end(), '\n', ' ');
      s += e;
    }
    s += "\n";
  }
  return s;
}

std::string heatmap_csv(const TrigPoly2D& u, int n_theta, int n_x, const Metadata& meta) {
  require(n_theta >= 1 && n_x >= 1, "heatmap: grid sizes must be positive");
  const Grid2D g = eval_grid(u, n_theta, n_x);
  std::string s = metadata_header(meta);
  s += "theta,x,value\n";
  s.reserve(s.size() + static_cast<std::size_t>(n_theta) * n_x * 60);
  for (int i = 0; i < n_theta; ++i) {
    const std::string th = format_double(Grid2D::theta(i, n_theta)) + ",";
    for (int j = 0; j < n_x; ++j) {
      s += th;
      s += format_double(Grid2D::theta(j, n_x));
      s += ',';
      s += format_double(g(i, j));
      s += '\n';
    }
  }
  return s;
}

}  // namespace ks

// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ksorbit/flow.hpp"
#include "ksorbit/newton.hpp"
#include "ksorbit/orbit.hpp"
#include "ksorbit/stability.hpp"
#include "ksorbit/validator.hpp"

namespace ks {

// Resolved run configuration embedded in every output file.
using Metadata = std::map<std::string, std::string>;

inline constexpr char kBinaryMagic[6] = {'K', 'S', 'O', 'R', 'B', '1'};

// JSON document {format, nu, inv_nu, f, period, d1, d2, parity, coeffs_a, coeffs_b, metadata}.
std::string orbit_to_text(const OrbitCandidate& cand, const Metadata& meta = {});
OrbitCandidate orbit_from_text(const std::string& text, Metadata* meta = nullptr);

// "KSORB1", u8 parity (0 odd, 1 even), i32 d1, i32 d2, f64 nu, f64 f, a..., b...
// All little-endian.
std::vector<unsigned char> orbit_to_binary(const OrbitCandidate& cand);
OrbitCandidate orbit_from_binary(const std::vector<unsigned char>& bytes);

// By content: binary when the file starts with the magic, text otherwise.
OrbitCandidate read_orbit(const std::string& path, Metadata* meta = nullptr);
// Binary when the path ends in ".ksorb", text otherwise.
void write_orbit(const std::string& path, const OrbitCandidate& cand, const Metadata& meta = {});

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

std::string metadata_header(const Metadata& meta, const char* prefix = "# ");
std::string format_double(double x);  // %.17g

std::string newton_report_text(const NewtonReport& rep, const Metadata& meta = {});
std::string certificate_text(const ValidationCertificate& cert, const Metadata& meta = {},
                             bool with_timings = false);
std::string stability_report_text(const StabilityReport& mono, const StabilityReport& op,
                                  const StabilityCrossCheck& check, const Metadata& meta = {});
// re,im,abs
std::string eigenvalues_csv(const StabilityReport& rep, const Metadata& meta = {});
// inv_nu,count,minima (semicolon separated)
std::string cascade_csv(const std::vector<CascadePoint>& points, const Metadata& meta = {});
// theta,x,value
std::string heatmap_csv(const TrigPoly2D& u, int n_theta, int n_x, const Metadata& meta = {});

}  // namespace ks

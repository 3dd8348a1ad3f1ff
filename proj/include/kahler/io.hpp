#pragma once

// Artifact formats.
//
// Binary grid dump (little endian):
//   bytes 0-6   "KEGRID1"
//   byte  7     n (uint8)
//   bytes 8-15  h (float64)
//   2n int32    dims, then 2n int32 lower lattice corners
//   float64     one value per node, axis 0 fastest
//   uint8       one mask per node (0 exterior, 1 interior, 2 dirichlet)
// Exterior values are written as stored, so a round trip is bit exact.

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kahler/grid.hpp"
#include "kahler/solver.hpp"
#include "kahler/verifier.hpp"

namespace kahler {

inline constexpr char kDumpMagic[7] = {'K', 'E', 'G', 'R', 'I', 'D', '1'};
inline constexpr std::size_t kDumpHeaderBytes = 16;

void write_dump(std::ostream& out, const ScalarField& field);
void write_dump(const std::string& path, const ScalarField& field);
/// Throws IoError on a bad header, truncation or trailing bytes.
ScalarField read_dump(std::istream& in);
ScalarField read_dump(const std::string& path);

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

/// node,x1..,y1..,u,mask over valued nodes.
void write_field_csv(std::ostream& out, const ScalarField& field);

nlohmann::json to_json(const SolveReport& report);
nlohmann::json to_json(const ConvexityCertificate& cert);
/// Summary only; the m field goes to the certificate CSV.
nlohmann::json to_json(const DirectionalReport& report);
nlohmann::json to_json(const BoundaryLayerReport& report);

/// node,x1..,y1..,lambda_h,lambda_a,lambda_m,m_1..m_k over certified records.
/// m_j is blank where direction j has no value.
void write_certificate_csv(std::ostream& out, const ScalarField& field, const ConvexityCertificate& cert,
                           const std::vector<DirectionalReport>& directions);

/// Writes text to a file, throwing IoError on failure.
void write_text(const std::string& path, const std::string& text);

}  // namespace kahler

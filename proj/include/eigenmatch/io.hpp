#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eigenmatch/matching.hpp"
#include "eigenmatch/mesh.hpp"
#include "eigenmatch/moments.hpp"
#include "eigenmatch/spectral.hpp"

namespace eigenmatch {

// FNV-1a over raw bytes; used to tie persisted artifacts to their source mesh.
uint64_t fnv1a64(const void* data, size_t size);
uint64_t file_checksum(const std::string& path);

// Binary container holding a basis together with its signature channels.
// Layout (little endian): magic "EMB1", u32 version, u64 mesh checksum,
// u32 vertex count, u32 eigen count h, u32 signature count Q,
// f64 eigenvalues[h], f64 mass[nv], f64 eigenfunctions[nv*h] vertex-major,
// f64 times[Q], f64 signature[nv*Q] vertex-major,
// u32 flag count, (u32, u32) near-degenerate index pairs.
struct BasisFile {
  uint64_t mesh_checksum = 0;
  SpectralBasis basis;
  SignatureField signature;
};

void write_basis_file(const std::string& path, const BasisFile& file);
BasisFile read_basis_file(const std::string& path);

// Binary container for one shape's moments. Layout: magic "EMM1",
// u32 version, u64 mesh checksum, u32 N, u32 P, u32 Q, f64 threshold,
// f64 alpha, f64 mu[N^3], f64 xi[N^3*P], f64 muS[N*Q], f64 xiS[N*Q*N*P].
struct MomentsFile {
  uint64_t mesh_checksum = 0;
  MomentSet moments;
};

void write_moments_file(const std::string& path, const MomentsFile& file);
MomentsFile read_moments_file(const std::string& path);

// Echo of the effective pipeline configuration, embedded in every report.
struct ConfigEcho {
  int N = 10;
  int h = 30;
  int P = 2;
  int Q = 6;
  double beta = 0.5;
  int K = 32;
};

void write_match_report_json(const std::string& path, const MatchResult& result,
                             const ConfigEcho& config);
void write_match_report_text(const std::string& path, const MatchResult& result,
                             const ConfigEcho& config);

// Reads back the parameters, alpha and config from a JSON match report.
struct MatchReport {
  MatchParams params;
  CostBreakdown cost;
  ConfigEcho config;
};
MatchReport read_match_report_json(const std::string& path);

struct PointMatchRow {
  int src;
  int dst;
  double distance;
};

// Plain text table: "src_index dst_index distance" per line. A non-empty
// header is echoed first as a '#' comment (effective config, for
// reproducibility).
void write_correspondence_table(const std::string& path,
                                const std::vector<PointMatchRow>& rows,
                                const std::string& header = "");

// Ascii PLY with a red-blue diverging per-vertex palette; zero maps to the
// neutral midpoint, constant fields come out uniformly neutral.
void export_colored_ply(const std::string& path, const TriMesh& mesh,
                        const Eigen::VectorXd& field);

// Maps one scalar to the palette given the symmetric range bound m > 0.
// Returned channels are in [0, 255].
std::array<int, 3> diverging_color(double value, double bound);

// OBJ with both meshes' vertices and one line element per correspondence;
// loads in standard viewers for visual inspection.
void export_correspondence_segments(const std::string& path, const TriMesh& mesh_x,
                                    const TriMesh& mesh_y,
                                    const std::vector<PointMatchRow>& rows);

}  // namespace eigenmatch

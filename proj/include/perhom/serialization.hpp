#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "perhom/drift.hpp"
#include "perhom/levy.hpp"
#include "perhom/periodic_field.hpp"
#include "perhom/sde_mc.hpp"

namespace perhom {

// Field layout: u32 d, u32 N, u32 components, then per component the f64
// pairs (re, im) for k in {-N/2..N/2-1}^d, row-major with the first axis slowest.
void write_field(std::ostream& os, const PeriodicField& u);
PeriodicField read_field(std::istream& is, bool real = true);
void save_field(const std::string& path, const PeriodicField& u);
PeriodicField load_field(const std::string& path, bool real = true);

nlohmann::json field_to_json(const PeriodicField& u);
PeriodicField field_from_json(const nlohmann::json& j, bool real = true);

/// {"alpha": a, "atoms": [[[xi...], w], ...]} or {"alpha": a, "uniform": mass}
/// or {"alpha": a, "fractional_laplacian": true}.
nlohmann::json measure_to_json(const SphericalMeasure& m);
SphericalMeasure measure_from_json(const nlohmann::json& j, int dim);

/// {"kind": "fourier_list" | "gradient_of" | "white_noise", "terms": [{"k": [...],
/// "component": c, "cos": a, "sin": b}], "seed", "amplitude", "centered", "regularity_target"}.
nlohmann::json drift_spec_to_json(const DriftSpec& s);
DriftSpec drift_spec_from_json(const nlohmann::json& j, int dim);

// Ensemble layout: 16-byte header (u32 magic "PHEN", u16 version, u16 d,
// u32 paths, u32 checkpoints), then f64 dt, u64 seed, u64 observable flag,
// f64 times[C], f64 x0[d], f64 Z[M C d], f64 L[M C d] and, if flagged,
// f64 observable[M C].
inline constexpr std::uint32_t kEnsembleMagic = 0x4e454850u;  // "PHEN" little-endian
inline constexpr std::uint16_t kEnsembleVersion = 1;
void write_ensemble(std::ostream& os, const TrajectoryEnsemble& ens);
TrajectoryEnsemble read_ensemble(std::istream& is);

/// Git blob hash: SHA-1 of "blob <size>\0" followed by the content, in hex.
std::string content_hash(const std::string& content);

}  // namespace perhom

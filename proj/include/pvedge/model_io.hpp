#pragma once

#include <string>

#include "pvedge/ensemble.hpp"

namespace pvedge {

// Binary model file ("GBTM"), little-endian:
//   magic "GBTM", version u16 = 1, reserved u16 = 0,
//   n_features u32, bias f64, n_trees u32,
//   then per tree: weight f64, n_nodes u32,
//     cut_predictor_index u32[n], children u32[2n] (left at 2i, right at
//     2i+1, 1-based, 0 = none), cut_point f64[n], nan_cut_points u8[n],
//     node_mean f64[n].
// A JSON mirror with the same field names is provided for inspection;
// non-finite reals appear as JSON null there.

inline constexpr std::uint16_t kModelFormatVersion = 1;

/// Encodes a validated model; throws ModelCorruptionError on an invalid one.
std::string serialize_model(const GBTEnsemble& model);

/// Decodes and validates. Throws ModelFormatError on bad magic/version or
/// truncation, ModelCorruptionError when the decoded model is invalid.
GBTEnsemble deserialize_model(const std::string& bytes);

void save_model(const GBTEnsemble& model, const std::string& path);

/// Reads either format: binary when the file starts with "GBTM", JSON otherwise.
GBTEnsemble load_model(const std::string& path);

std::string model_to_json(const GBTEnsemble& model);
GBTEnsemble model_from_json(const std::string& text);
void save_model_json(const GBTEnsemble& model, const std::string& path);

}  // namespace pvedge

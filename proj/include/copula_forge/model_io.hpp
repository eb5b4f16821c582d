#ifndef COPULA_FORGE_MODEL_IO_HPP
#define COPULA_FORGE_MODEL_IO_HPP

#include <string>
#include <string_view>
#include <variant>

#include "copula_forge/model.hpp"

namespace copula_forge {

using ModelSpec = std::variant<AcSpec, HacSpec>;

inline constexpr const char* kModelFormat = "copula-forge-model";
inline constexpr int kModelVersion = 1;

/// JSON text; doubles are written with enough digits to round-trip exactly.
std::string model_to_json(const ModelSpec& spec);
/// Throws IoError for malformed text, a foreign format or another version.
ModelSpec model_from_json(std::string_view text);

/// Writes through a temporary file and renames it into place.
void save_model(const std::string& path, const ModelSpec& spec);
ModelSpec load_model(const std::string& path);

}  // namespace copula_forge

#endif  // COPULA_FORGE_MODEL_IO_HPP

#pragma once

#include <string>
#include <string_view>

namespace conjoint {

// Lowercase hex SHA-256 of the bytes, prefixed "sha256:".
std::string sha256_tag(std::string_view bytes);

}  // namespace conjoint

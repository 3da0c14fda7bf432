#pragma once

#include "greg/model.hpp"

#include <string>

namespace greg {

// Binary container: "GREG" magic, u32 version, u32 dims (n, d, m, r),
// u32 activation id, u32 layer count, then row-major little-endian f64
// payloads for U, D, c and each layer record. Plain layers carry a dense v0;
// conv layers carry grid/window metadata plus kernel coefficients.
// Writes go to a temp file that is renamed into place.
void save_checkpoint(const ModelState& model, const std::string& path);
ModelState load_checkpoint(const std::string& path);

}  // namespace greg

// io.hpp - MPFVOL1 / MPFSIN1 file formats.
//
// MPFVOL1: ASCII magic line, `dims nx ny nz`, `spacing sx sy sz` (mm),
// `dtype f32le`, blank line, then raw little-endian 32-bit floats in
// row-major order (x fastest).  Bit-exact round trip.
//
// MPFSIN1: ASCII `views n`, `rows r`, `cols c`, `pitch p`, `angles` followed
// by n decimal radians, blank line, raw f32 LE values, then raw f32 LE
// weights.
#pragma once

#include <string>

#include "core/projector.hpp"
#include "core/volume.hpp"

namespace mpf {

void write_volume(const Volume& v, const std::string& path);
Volume read_volume(const std::string& path);

void write_sinogram(const Sinogram& s, const std::string& path);
Sinogram read_sinogram(const std::string& path);

} // namespace mpf

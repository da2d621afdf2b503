#pragma once

#include <string>

#include "proxpnp/signal.hpp"

namespace proxpnp {

// 8-bit PNG / PGM / PPM readers and writers. Pixels are mapped to doubles in
// [0,1]; writing clamps to [0,1] and rounds to 8 bits. Format is chosen by
// file extension (.png, .pgm, .ppm); readers also accept plain-text P2/P3.
Signal read_image(const std::string& path);
void write_image(const std::string& path, const Signal& img);

Signal read_png(const std::string& path);
void write_png(const std::string& path, const Signal& img);
Signal read_pnm(const std::string& path);
void write_pnm(const std::string& path, const Signal& img);

}  // namespace proxpnp

// Generates the small synthetic test scenes bundled under tests/data/.
// Deterministic by construction; rerunning reproduces the same files.

#include <cmath>
#include <iostream>
#include <string>

#include "proxpnp/image_io.hpp"

using namespace proxpnp;

namespace {

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// A star-shaped blob on a graded background with a few pebbles; loosely
// starfish-like, enough texture for deblurring demos.
Signal starfish(int n) {
  Signal img({n, n, 3});
  const double cx = 0.5 * n, cy = 0.52 * n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double dx = (j - cx) / n, dy = (i - cy) / n;
      const double r = std::sqrt(dx * dx + dy * dy);
      const double theta = std::atan2(dy, dx);
      const double arm = 0.16 + 0.11 * std::cos(5.0 * theta + 0.7);
      const double body = smoothstep(arm, arm - 0.03, r);
      const double ripple = 0.05 * std::sin(40.0 * r + 3.0 * theta);
      double bg = 0.25 + 0.35 * (i + 0.6 * j) / (1.6 * n);
      double pebbles = 0.08 * std::sin(0.9 * i) * std::cos(1.3 * j + 0.4);
      const double base = std::clamp(bg + pebbles, 0.0, 1.0);
      const double rch = base * (1.0 - body) + body * std::clamp(0.85 + ripple, 0.0, 1.0);
      const double gch = base * (1.0 - body) + body * std::clamp(0.45 + ripple, 0.0, 1.0);
      const double bch = base * (1.0 - body) + body * std::clamp(0.25 + 0.5 * ripple, 0.0, 1.0);
      img.channel(0)[i * n + j] = std::clamp(rch, 0.0, 1.0);
      img.channel(1)[i * n + j] = std::clamp(gch, 0.0, 1.0);
      img.channel(2)[i * n + j] = std::clamp(bch, 0.0, 1.0);
    }
  }
  return img;
}

// Overlapping soft disks on a vertical gradient, grayscale.
Signal leaves(int n) {
  Signal img({n, n, 1});
  const struct {
    double x, y, r, v;
  } disks[] = {{0.3, 0.3, 0.18, 0.9}, {0.62, 0.42, 0.22, 0.7}, {0.45, 0.7, 0.2, 0.55},
               {0.78, 0.74, 0.14, 0.85}, {0.18, 0.66, 0.12, 0.4}};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0.2 + 0.3 * i / n;
      for (const auto& d : disks) {
        const double dx = static_cast<double>(j) / n - d.x;
        const double dy = static_cast<double>(i) / n - d.y;
        const double rr = std::sqrt(dx * dx + dy * dy);
        v = v * smoothstep(d.r - 0.02, d.r, rr) + d.v * smoothstep(d.r, d.r - 0.02, rr);
      }
      img.channel(0)[i * n + j] = std::clamp(v, 0.0, 1.0);
    }
  return img;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "tests/data";
  write_png(dir + "/starfish64.png", starfish(64));
  write_png(dir + "/leaves128.png", leaves(128));
  write_pnm(dir + "/leaves32.pgm", leaves(32));
  std::cout << "wrote test images to " << dir << "\n";
  return 0;
}

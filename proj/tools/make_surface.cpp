// Generates the bundled closed test surface: a Fibonacci sampling of the unit
// sphere pushed through a smooth low-order radial perturbation and an
// anisotropic scaling. Deterministic; writes CSV to stdout.

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>

#include "cloudinv/io.hpp"

int main(int argc, char** argv) {
  int n = 2930;
  if (argc > 1) {
    n = std::atoi(argv[1]);
    if (n < 4) {
      std::cerr << "usage: make_surface [n >= 4]\n";
      return 1;
    }
  }

  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  std::cout << "# closed genus-0 surface, " << n << " points\n";
  std::cout << "# x,y,z\n";
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    const double dx = r * std::cos(phi);
    const double dy = r * std::sin(phi);
    const double dz = z;
    // Strictly positive smooth radius (bounded below by 0.6).
    const double R = 1.0 + 0.3 * dx * dz + 0.15 * 0.5 * (3.0 * dz * dz - 1.0) +
                     0.2 * dx * dy;
    const double x = 2.0 * R * dx;
    const double y = 1.1 * R * dy;
    const double zc = 1.4 * R * dz;
    std::cout << cloudinv::format_double(x) << "," << cloudinv::format_double(y) << ","
              << cloudinv::format_double(zc) << "\n";
  }
  return 0;
}

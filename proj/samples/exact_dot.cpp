// Correctly rounded dot products that do not depend on the reduction tree.

#include <cstdio>
#include <vector>

#include "reprocg/hexfloat.hpp"
#include "reprocg/repro_reduce.hpp"

int main() {
  const std::vector<double> x{1e100, 1.0, -1e100, 0x1p-60};
  const std::vector<double> y{1.0, 1.0, 1.0, 1.0};

  double naive = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) naive += x[i] * y[i];
  std::printf("naive loop        %s\n", reprocg::format_hex(naive).c_str());

  for (const reprocg::Topology& t : {reprocg::Topology{1, 1, 256}, reprocg::Topology{4, 2, 1}}) {
    const auto e = reprocg::exdot_exblas(x, y, t);
    const auto o = reprocg::exdot_opt(x, y, t);
    std::printf("P=%zu T=%zu bm=%-3zu  exblas %s  opt %s%s\n", t.processes, t.workers, t.chunk,
                reprocg::format_hex(e.value).c_str(), reprocg::format_hex(o.value).c_str(),
                o.residue_warning ? " (residue)" : "");
  }
}

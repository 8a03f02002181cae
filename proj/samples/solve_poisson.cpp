// Solves a 27-point Poisson system on two different topologies and checks
// that the residual histories agree bit for bit.

#include <bit>
#include <cstdio>

#include "reprocg/reprocg.hpp"

int main() {
  const reprocg::CsrMatrix a = reprocg::gen_poisson27(16, 16, 16);
  const auto b = reprocg::rhs_from_ones(a);
  const std::vector<double> ones(a.rows(), 1.0);

  reprocg::SolverConfig one;
  reprocg::SolverConfig many;
  many.topology = {8, 4, 13};
  many.variant = reprocg::Variant::opt;

  const auto r1 = reprocg::pcg_solve(a, b, one, ones);
  const auto r2 = reprocg::pcg_solve(a, b, many, ones);

  std::printf("n=%zu iterations %zu / %zu\n", a.rows(), r1.iterations, r2.iterations);
  std::printf("final tau %s / %s\n", reprocg::format_hex(r1.residual_history.back()).c_str(),
              reprocg::format_hex(r2.residual_history.back()).c_str());
  std::printf("direct error %.3e\n", r1.direct_error);
  bool same = r1.residual_history.size() == r2.residual_history.size();
  for (std::size_t i = 0; same && i < r1.residual_history.size(); ++i)
    same = std::bit_cast<std::uint64_t>(r1.residual_history[i]) == std::bit_cast<std::uint64_t>(r2.residual_history[i]);
  std::printf("residual histories %s\n", same ? "identical" : "DIFFER");
  return same ? 0 : 1;
}

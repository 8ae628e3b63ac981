// Transfinite diameter of the unit disk from Gram determinants on polar
// meshes, with rho acceleration over the degree sequence.
#include <pluripot/pluripot.hpp>

#include <cstdio>

int main() {
    using namespace pluripot;
    CompactSet disk{Disk{}};
    std::vector<int> degrees;
    for (int k = 4; k <= 20; k += 2) degrees.push_back(k);
    TDEstimate r = td_sequence(disk, degrees, RhoSelector::diagonal());
    for (std::size_t i = 0; i < degrees.size(); ++i)
        std::printf("k=%2d  delta=%.12f  err=%.3e\n", degrees[i], r.raw[i], r.abs_err[i]);
    std::printf("accelerated  %.12f  err=%.3e\n", r.accelerated.back(), r.accelerated_abs_err.back());
    std::printf("exact        %.12f\n", *r.reference);
}

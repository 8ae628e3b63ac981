#include <pluripot/pluripot.hpp>

#include <cstdio>

// v_k = (1/2k) log B_k against the closed-form extremal function of the
// square at a few points off the set.
int main() {
    using namespace pluripot;
    CompactSet sq{Box::square()};
    MatrixXcd z(3, 2);
    z << 2.0, 0.0, cplx(0.5, 0.5), 0.3, 1.5, -1.5;
    VectorXd ref = reference_extremal(sq, z);
    for (int k : {5, 10, 20}) {
        OrthoState s = prepare_state(mesh_square(k), k, Method::szef);
        VectorXd v = extremal_values(s, z, Method::szef, false).v;
        std::printf("k=%2d", k);
        for (int i = 0; i < 3; ++i) std::printf("  %.6f (%.6f)", v(i), ref(i));
        std::printf("\n");
    }
}

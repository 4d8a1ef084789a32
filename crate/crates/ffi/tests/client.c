#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "map_ising.h"

#define CHECK(expr)                                                                  \
    do {                                                                             \
        MiStatus s_ = (expr);                                                        \
        if (s_ != MI_STATUS_OK) {                                                    \
            const char *m_ = mi_last_error_message();                                \
            fprintf(stderr, "%s -> %d: %s\n", #expr, (int)s_, m_ ? m_ : "(none)");   \
            return 1;                                                                \
        }                                                                            \
    } while (0)

int main(void) {
    double eps;
    CHECK(mi_boundary_epsilon(0.24, 1, &eps));
    MiObservables o;
    CHECK(mi_observables(0.24, eps, &o));
    if (!o.on_boundary || fabs(o.theta / log(2.0) - 0.1629) > 2e-4) {
        fprintf(stderr, "boundary entropy %f\n", o.theta / log(2.0));
        return 1;
    }

    enum { N = 1000 };
    int8_t x[N], y[N], w[N];
    CHECK(mi_sample_pair(0.24, 0.15, N, 1, 0, x, y));
    MiDecodeResult *r = NULL;
    CHECK(mi_decode(y, N, 0.24, 0.15, MI_MODE_AUTO, 0, &r));
    MiDecodeStats st;
    CHECK(mi_decode_result_stats(r, &st));
    CHECK(mi_decode_result_witness(r, w, N));
    size_t need = 0;
    CHECK(mi_decode_result_count(r, NULL, 0, &need));
    char *digits = malloc(need);
    CHECK(mi_decode_result_count(r, digits, need, &need));
    printf("v_hat=%.6f c_hat=%.6f theta_hat=%.6f count_digits=%zu\n", st.v_hat, st.c_hat, st.theta_hat, need - 1);
    free(digits);
    mi_decode_result_free(r);

    if (mi_observables(0.7, 0.1, &o) != MI_STATUS_DOMAIN || mi_last_error_message() == NULL) {
        return 1;
    }
    return 0;
}

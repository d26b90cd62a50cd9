#include <math.h>
#include <stdio.h>
#include <string.h>

#include "opa.h"

#define CHECK(cond)                                                        \
    do {                                                                   \
        if (!(cond)) {                                                     \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__,         \
                    __LINE__, #cond);                                      \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    OpaWeight *w = NULL;
    OpaPoly *f = NULL;
    OpaResult *r = NULL;
    char msg[256];

    CHECK(opa_weight_power(0.0, &w) == OPA_STATUS_OK);
    CHECK(opa_poly_from_roots("0:1", &f) == OPA_STATUS_OK);
    CHECK(opa_solve(f, 1, 2.0, w, OPA_SOLVER_AUTO, NULL, &r) == OPA_STATUS_OK);

    double norm = 0.0;
    CHECK(opa_result_optimal_norm(r, &norm) == OPA_STATUS_OK);
    CHECK(fabs(norm * norm - 1.0 / 3.0) < 1e-12);

    double re[4], im[4];
    size_t len = 0;
    CHECK(opa_result_approximant(r, re, im, 1, &len) == OPA_STATUS_BUFFER_TOO_SMALL);
    CHECK(len == 2);
    CHECK(opa_result_approximant(r, re, im, 4, &len) == OPA_STATUS_OK);
    CHECK(fabs(re[0] - 2.0 / 3.0) < 1e-12 && fabs(re[1] - 1.0 / 3.0) < 1e-12);

    CHECK(opa_weight_power(NAN, NULL) != OPA_STATUS_OK);
    CHECK(opa_last_error_message(msg, sizeof msg) > 0);

    OpaRatePrediction pred;
    CHECK(opa_classify(1.0, 0.0, &pred) == OPA_STATUS_OK);
    CHECK(!pred.cyclic);

    opa_result_free(r);
    opa_poly_free(f);
    opa_weight_free(w);
    printf("ok %s\n", opa_version());
    return 0;
}

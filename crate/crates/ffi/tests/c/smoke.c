#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "wiener_ffi.h"

#define CHECK(call)                                                    \
    do {                                                               \
        WienerStatus s_ = (call);                                      \
        if (s_ != WIENER_STATUS_OK) {                                  \
            const char *m_ = wiener_last_error();                      \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, m_ ? m_ : ""); \
            return 1;                                                  \
        }                                                              \
    } while (0)

int main(void) {
    WienerGrid *grid = NULL;
    CHECK(wiener_grid_new_integers(-2, 6, &grid));
    size_t n = wiener_grid_len(grid);
    double *re = calloc(n, sizeof(double));
    re[2] = 1.0; /* index 0 */
    re[3] = 1.0; /* index 1 */
    WienerFunction *f = NULL;
    CHECK(wiener_function_new(grid, re, NULL, n, &f));

    WienerSpace *space = NULL;
    CHECK(wiener_space_new_json(
        "{\"local\":\"linf\",\"window\":{\"lo\":[0],\"hi\":[0]},"
        "\"global\":{\"kind\":\"weighted-lp\",\"p\":0.5}}",
        &space));
    double v = 0.0;
    int overflow = -1;
    CHECK(wiener_amalgam_norm(space, f, &v, &overflow));
    if (fabs(v - 4.0) > 1e-12 || overflow != 0) {
        fprintf(stderr, "norm %g overflow %d\n", v, overflow);
        return 1;
    }

    WienerFunction *c = NULL;
    double trunc = -1.0;
    CHECK(wiener_convolve(f, f, &c, &trunc));
    CHECK(wiener_function_values(c, re, NULL, n));
    if (re[2] != 1.0 || re[3] != 2.0 || re[4] != 1.0 || trunc != 0.0) {
        fprintf(stderr, "convolution %g %g %g\n", re[2], re[3], re[4]);
        return 1;
    }

    if (wiener_amalgam_norm(NULL, f, &v, NULL) != WIENER_STATUS_NULL_POINTER || !wiener_last_error()) {
        return 1;
    }
    printf("ok %s\n", wiener_version());
    wiener_function_free(c);
    wiener_function_free(f);
    wiener_space_free(space);
    wiener_grid_free(grid);
    free(re);
    return 0;
}

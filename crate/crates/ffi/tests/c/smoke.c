/* Drives the C ABI end to end: open, session, scripted message, ragas, close. */
#include <stdio.h>
#include <string.h>

#include "basin_copilot.h"

static int fail(const char *what, BcStatus s) {
    const char *err = bc_last_error();
    fprintf(stderr, "%s: status %d: %s\n", what, (int)s, err ? err : "(none)");
    return 1;
}

int main(int argc, char **argv) {
    if (argc != 2) {
        fprintf(stderr, "usage: smoke CONFIG\n");
        return 2;
    }
    BcEngine *engine = NULL;
    BcStatus s = bc_engine_open(argv[1], &engine);
    if (s != BC_STATUS_OK) return fail("open", s);

    char *json = NULL;
    s = bc_session_create(engine, "c-session", &json);
    if (s != BC_STATUS_OK) return fail("session", s);
    bc_string_free(json);

    s = bc_session_send(engine, "c-session", "Rain at R01 in 2024?", NULL, &json);
    if (s != BC_STATUS_OK) return fail("send", s);
    if (!strstr(json, "\"refs\"") || !strstr(json, "\"chart_spec\"")) {
        fprintf(stderr, "unexpected answer: %s\n", json);
        return 1;
    }
    bc_string_free(json);

    s = bc_session_send(engine, "missing", "hello", NULL, &json);
    if (s != BC_STATUS_NOT_FOUND || bc_last_error() == NULL) return fail("missing session", s);

    double means[4] = {0.8009, 0.7763, 0.7877, 0.8571};
    double score = 0.0;
    s = bc_ragas_score(means, &score);
    if (s != BC_STATUS_OK) return fail("ragas", s);

    bc_engine_close(engine);
    printf("ok %s %.4f\n", bc_version(), score);
    return 0;
}

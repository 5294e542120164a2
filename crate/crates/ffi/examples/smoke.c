#include <stdio.h>
#include <string.h>

#include "x3hd.h"

int main(void) {
    const char *text = "p x3sat 7 4\n1 2 3 0\n1 4 5 0\n1 6 7 0\n2 4 -6 0\n";
    X3Formula *f = NULL;
    if (x3hd_formula_parse(text, &f) != X3_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", x3hd_last_error_message());
        return 1;
    }
    X3Options opts = x3hd_options_default();
    X3Report *r = NULL;
    if (x3hd_solve(f, &opts, &r) != X3_STATUS_OK) {
        fprintf(stderr, "solve: %s\n", x3hd_last_error_message());
        x3hd_formula_free(f);
        return 1;
    }
    char *poly = x3hd_report_poly(r);
    printf("%s\nmax_hd = %lld\n", poly, (long long)x3hd_report_max_hd(r));
    int ok = strcmp(poly, "12*u^4 + 4") == 0;
    x3hd_string_free(poly);
    x3hd_report_free(r);
    x3hd_formula_free(f);

    if (x3hd_formula_parse("p x3sat 2 1\n1 2 3 0\n", &f) != X3_STATUS_PARSE_ERROR || f != NULL) {
        return 1;
    }
    printf("%s\n", x3hd_last_error_message());
    return ok ? 0 : 1;
}

#include <stdio.h>
#include <string.h>
#include "gm_surrogate.h"

int main(void) {
    GmGraph *k3 = NULL, *p3 = NULL;
    if (gm_graph_parse("3\n011\n101\n110\n", &k3) != GM_STATUS_OK) return 1;
    if (gm_graph_parse("n=3\n1 2\n2 3\n", &p3) != GM_STATUS_OK) return 2;
    GmReport *report = NULL;
    if (gm_match(k3, p3, 0, &report) != GM_STATUS_OK) return 3;
    size_t sigma[3];
    if (gm_report_sigma(report, sigma, 3) != GM_STATUS_OK) return 4;
    char *json = gm_report_to_json(report);
    if (json == NULL || strstr(json, "\"gap\": 0") == NULL) return 5;
    printf("symdiff=%lld gap=%lld sigma=%zu,%zu,%zu\n", (long long)gm_report_symdiff(report),
           (long long)gm_report_gap(report), sigma[0], sigma[1], sigma[2]);
    gm_string_free(json);
    gm_report_free(report);

    GmGraph *bad = NULL;
    if (gm_graph_parse("n=3\n1 1\n", &bad) != GM_STATUS_PARSE) return 6;
    if (gm_last_error_message() == NULL) return 7;
    gm_graph_free(k3);
    gm_graph_free(p3);
    return 0;
}

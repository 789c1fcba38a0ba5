#include <stdio.h>

#include "swnoether.h"

int main(void) {
    SwConfig *cfg = NULL;
    if (sw_config_from_toml("[model]\nkind = \"sg\"\n", &cfg) != SW_STATUS_OK) {
        fprintf(stderr, "%s\n", sw_last_error_message());
        return 2;
    }
    char *report = NULL;
    SwStatus s = sw_execute(cfg, SW_COMMAND_CHECK, &report);
    if (report != NULL) {
        fputs(report, stdout);
        sw_string_free(report);
    }
    sw_config_free(cfg);

    SwConfig *bad = NULL;
    if (sw_config_from_toml("[model]\nkind = \"sg\"\nf = 0.0\n", &bad) != SW_STATUS_OK) {
        return 2;
    }
    if (sw_execute(bad, SW_COMMAND_CHECK, NULL) != SW_STATUS_CONFIG_ERROR) {
        return 4;
    }
    printf("error: %s\n", sw_last_error_message());
    sw_config_free(bad);
    return (int)s;
}

#include "counters.h"

/* running totals shared by the whole process */
int stat_total = 0;
int stat_peak = 0;

void stats_reset(void) {
    stat_total = 0;
    stat_peak = 0;
}

void stats_update(int amount) {
    stat_total = stat_total + amount;
    if (stat_total > stat_peak) {
        stat_peak = stat_total;
    }
}

int stats_summary(void) {
    int report_value = stat_total + stat_peak;
    return report_value;
}

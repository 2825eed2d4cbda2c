#include "counters.h"

static int queue_depth = 0;

int transport_send(int payload) {
    stats_update(payload);
    queue_depth = queue_depth + 1;
    return queue_depth;
}

int transport_drain(void) {
    int drained = queue_depth;
    queue_depth = 0;
    stats_update(drained);
    return drained;
}

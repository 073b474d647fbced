/* Minimal consumer of the qchain C API.
 *
 * Build (after `cargo build -p qchain-ffi`):
 *   cc examples/demo.c -Iinclude -L../../target/debug -lqchain_ffi -o demo
 *   LD_LIBRARY_PATH=../../target/debug ./demo
 */
#include <stdio.h>
#include <string.h>

#include "qchain.h"

int main(void) {
    const char *config =
        "{\"scenario\": \"grover-demo\", \"master_seed\": 42,"
        " \"params\": {\"qubits\": 3, \"marked\": 1}}";

    QchainReport *report = NULL;
    QchainStatus status = qchain_run_scenario(config, &report);
    if (status != QCHAIN_STATUS_OK) {
        fprintf(stderr, "run failed (%d): %s\n", (int)status, qchain_last_error());
        return 1;
    }

    bool passed = false;
    qchain_report_passed(report, &passed);

    char *json = NULL;
    if (qchain_report_json(report, &json) != QCHAIN_STATUS_OK) {
        qchain_report_free(report);
        return 1;
    }

    printf("version=%s passed=%d bytes=%zu\n", qchain_version(), passed ? 1 : 0,
           strlen(json));

    unsigned char digest[32];
    qchain_sha256((const unsigned char *)"abc", 3, digest);
    printf("sha256(abc)[0..4]=%02x%02x%02x%02x\n", digest[0], digest[1],
           digest[2], digest[3]);
    printf("catchup(0.3, 2)=%.6f\n", qchain_catchup_probability(0.3, 2));
    printf("grover_k(1024, 1)=%llu\n",
           (unsigned long long)qchain_grover_optimal_iterations(1024, 1));

    qchain_string_free(json);
    qchain_report_free(report);
    return passed ? 0 : 2;
}

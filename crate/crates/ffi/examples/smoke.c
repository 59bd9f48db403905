#include <stdio.h>
#include <string.h>
#include "aip.h"

int main(void) {
    const char *scene_json =
        "{\"format\":\"aip-scene/1\",\"objects\":["
        "{\"id\":\"box\",\"state_before\":{\"qv\":[\"0\",\"0\",\"0\"],\"qw\":[\"0\",\"0\",\"0\"]},"
        "\"state_after\":{\"qv\":[\"+\",\"0\",\"0\"],\"qw\":[\"0\",\"0\",\"0\"]}},"
        "{\"id\":\"ground\",\"static\":true,\"state_before\":{\"qv\":[\"0\",\"0\",\"0\"],\"qw\":[\"0\",\"0\",\"0\"]},"
        "\"state_after\":{\"qv\":[\"0\",\"0\",\"0\"],\"qw\":[\"0\",\"0\",\"0\"]}}],"
        "\"contacts\":[{\"a\":\"box\",\"b\":\"ground\",\"normal_q\":[\"0\",\"0\",\"+\"],"
        "\"qr_a\":[\"0\",\"0\",\"-\"],\"qr_b\":[\"0\",\"0\",\"+\"]}],\"gravity\":true}";
    AipScene *scene = NULL;
    if (aip_scene_parse(scene_json, 1e-6, &scene) != AIP_STATUS_OK) return 1;
    if (aip_scene_object_count(scene) != 2) return 2;
    AipSolveOptions opts = aip_solve_options_default();
    AipSolutionSet *set = NULL;
    if (aip_solve(scene, &opts, &set) != AIP_STATUS_OK) return 3;
    uintptr_t n = aip_solution_count(set);
    if (n == 0) return 4;
    char *action = NULL;
    if (aip_solution_action(set, 0, &action) != AIP_STATUS_OK) return 5;
    if (strncmp(action, "push object box", 15) != 0) return 6;
    printf("%lu solutions; first: %s\n", (unsigned long)n, action);
    aip_string_free(action);
    aip_solution_set_free(set);
    aip_scene_free(scene);
    return 0;
}

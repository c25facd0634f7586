// One line per acceptance criterion; exit status 1 when any criterion fails.
// Optional arguments select criterion ids, e.g. `acceptance 1 2 8`.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "neckflow/acceptance.hpp"

int main(int argc, char** argv)
{
    neckflow::AcceptanceConfig config;
    bool all_pass = true;
    auto run = [&](int id) {
        const neckflow::CriterionResult res = neckflow::run_criterion(id, config);
        std::printf("%s\n", neckflow::summary_line(res).c_str());
        std::fflush(stdout);
        all_pass = all_pass && res.pass;
    };
    if (argc > 1) {
        for (int i = 1; i < argc; ++i)
            run(std::atoi(argv[i]));
    } else {
        for (int id = 1; id <= neckflow::kCriterionCount; ++id)
            run(id);
    }
    return all_pass ? 0 : 1;
}

#ifndef HERMRT_TOOLS_COMMANDS_HPP
#define HERMRT_TOOLS_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace hermrt::cli
{

/// Exit codes: 0 success, 1 error, 2 tolerance failure.
enum ExitCode : int
{
    kOk = 0,
    kError = 1,
    kTolerance = 2,
};

struct ModesOptions
{
    std::string config_path;
    std::vector<std::string> overrides;
    int jobs = 0;  // sweep workers; 0: config, then HERMRT_JOBS, then hardware
    bool quiet = false;
};

int cmd_modes(const ModesOptions& opt, std::ostream& out, std::ostream& err);

int cmd_velset_list(std::ostream& out);
int cmd_velset_validate(const std::string& set, int degree, double tol, std::ostream& out, std::ostream& err);

struct DeriveOptions
{
    int dim = 2;
    int degree = 0;
    std::vector<std::string> groups;  // representatives like "1,0"
    std::string name = "custom";
    std::string output;  // stdout when empty
};

int cmd_velset_derive(const DeriveOptions& opt, std::ostream& out, std::ostream& err);

struct SimOptions
{
    std::string config_path;
    std::vector<std::string> overrides;
    int jobs = 0;
};

int cmd_sim(const SimOptions& opt, std::ostream& out, std::ostream& err);

/// Command-line entry point used by the executable.
int run(int argc, char** argv);

}  // namespace hermrt::cli

#endif  // HERMRT_TOOLS_COMMANDS_HPP

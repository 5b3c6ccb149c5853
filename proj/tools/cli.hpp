// Batch front end: run configuration and the find / certify / sweep / render commands.
// Commands write artifacts under the output directory and return a process exit code.
#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemoproof/certify.hpp"
#include "chemoproof/finder.hpp"

namespace chemoproof::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNoConvergence = 2;
inline constexpr int kExitNotProved = 3;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Params params;  // geometry carries nu
    // [proof]
    int N = 100;
    int K = 0;
    double rstar = 1e-6;
    int max_halvings = 6;
    // [finder]
    double tol = 1e-12;
    int maxit = 50;
    int seed_mode = 0;  // 0: start from (1, 1)
    double seed_amplitude = 0.1;
    std::string seed_method = "relax";  // relax | newton
    // [sweep]
    std::vector<double> sigma_grid;
    std::vector<int> modes{1, 2, 3, 4, 5, 6};
    std::vector<double> amplitudes{0.1, 0.3};
    bool relax = true;
    // [output]
    std::string out_dir = "out";
    int threads = 1;
};

// Parses a key=value config with [model], [proof], [finder], [sweep], [output]
// sections. Unknown sections or keys and malformed values throw ConfigError.
RunConfig parse_config(std::istream& is, const std::string& name = "config");
RunConfig load_config(const std::string& path);

// Geometry from the config with b possibly written as "k*pi".
Geometry parse_domain(const std::string& a, const std::string& b, double nu);

// Reads a candidate and re-attaches the geometry of `p` (which may carry a
// tighter length enclosure). Throws ConfigError when a, b or nu differ.
SeqPair load_candidate(const std::string& path, const Params& p);

std::string default_candidate_path(const RunConfig& c);

int cmd_find(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_certify(const RunConfig& c, const std::string& input, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_render(const std::string& index_csv, const std::string& out_dir, std::ostream& out, std::ostream& err);

struct IndexRow {
    double sigma = 0.0;
    double amplitude = 0.0;
    bool converged = false;
    std::string certificate_path;
    std::string status;
};
std::vector<IndexRow> read_index(const std::string& path);
std::string render_svg(const std::vector<IndexRow>& rows);

}  // namespace chemoproof::cli

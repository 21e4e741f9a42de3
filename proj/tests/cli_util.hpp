#pragma once

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace clitest {

struct Result {
    int code = -1;
    std::string out;
};

// Runs the CLI with the given argument string; stderr goes to err_path if set.
inline Result run(const std::string& args, const std::string& err_path = "/dev/null") {
    std::string cmd = std::string(LQGLAB_CLI_PATH) + " " + args + " 2>" + err_path;
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("lqglab_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

// Every stochastic command at a small size, as (name, args without --out).
struct Case {
    std::string name, args, ext;
};

inline std::vector<Case> determinism_cases() {
    return {
        {"sample-mullin", "sample-mullin --n 200 --seed 7", "txt"},
        {"sample-perc-map", "sample-perc-map --l 3 --seed 7 --max-vertices 40", "txt"},
        {"embed-cardy-smirnov", "embed-cardy-smirnov --lattice 8 --samples 400 --seed 7 --threads 2", "csv"},
        {"gmc", "gmc --gamma 0.5 --eps 0.05 --grid 64 --seed 7", "csv"},
        {"gmc-disk", "gmc --gamma 1 --eps 0.1 --grid 24 --domain disk --boundary free --seed 7", "csv"},
        {"mated-crt-dim", "mated-crt-dim --gamma 1.2 --n 20000 --radii 2,4,8 --centers 100 --seed 7 --threads 2", "csv"},
        {"arm-exponents", "arm-exponents --type two --rmin 16 --rmax 32 --trials 200 --seed 7 --threads 2", "csv"},
        {"walk-stats", "walk-stats --steps kreweras --length 300 --seed 7", "csv"},
        {"backbone", "backbone --tol 1e-12", "json"},
        {"charges", "charges --gamma 0.7", ""},
    };
}

// Runs each case twice into separate directories and compares stdout and the
// artifact bytes. Returns the names that differ.
inline std::vector<std::string> determinism_failures(const std::filesystem::path& dir) {
    std::vector<std::string> bad;
    for (auto& c : determinism_cases()) {
        std::string outs[2], arts[2];
        for (int k = 0; k < 2; ++k) {
            auto d = dir / (c.name + "_" + std::to_string(k));
            std::filesystem::create_directories(d);
            std::string args = c.args;
            auto art = d / ("out." + c.ext);
            if (!c.ext.empty()) args += " --out " + art.string();
            auto r = run(args);
            outs[k] = std::to_string(r.code) + r.out;
            if (r.code != 0) outs[k] += "#fail";
            if (!c.ext.empty()) {
                arts[k] = slurp(art);
                for (auto& e : std::filesystem::directory_iterator(d))
                    if (e.path().filename() != "manifest.json" && e.path() != art) arts[k] += slurp(e.path());
            }
        }
        if (outs[0] != outs[1] || arts[0] != arts[1] || outs[0].find("#fail") != std::string::npos) bad.push_back(c.name);
    }
    return bad;
}

}  // namespace clitest

#pragma once

// Helpers for tests that drive the finray binary: run a command line, hash
// every file under a directory, and a fixed workload covering each subcommand.

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

namespace cli_support {

namespace fs = std::filesystem;

inline const std::string kBinary = FINRAY_CLI;

/// Runs `finray <args>` inside `cwd`; stdout and stderr go to `log`. Returns the exit status.
inline int run(const fs::path& cwd, const std::string& args, const fs::path& log) {
    fs::create_directories(cwd);
    const std::string cmd = "cd '" + cwd.string() + "' && '" + kBinary + "' " + args + " >'" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : 128;
}

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

/// Relative path -> SHA-256 for every regular file under `root`.
inline std::map<std::string, std::string> hash_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = sha256_hex(slurp(e.path()));
    return out;
}

struct Step {
    std::string name;
    std::string args;
};

/// Every subcommand with a small workload. Paths are relative so two runs in
/// different directories must produce identical bytes.
inline std::vector<Step> workload() {
    const std::string quad = "40,30,290,45,300,205,25,215";
    return {
        {"mesh", "mesh --design baby --size 1.5 --out out/mesh/mesh.txt --svg out/mesh/mesh.svg"},
        {"simulate", "simulate --design original --indenter rect:10x10 --location fingertip --depth 1 --steps 4 "
                     "--out out/simulate"},
        {"fig5", "fig5 --steps 4 --max-depth 2 --mesh-size 1 --out out/fig5"},
        {"raytrace", "raytrace --rays 181 --out out/raytrace"},
        {"synth", "synth --out out/synth"},
        {"unwarp", "unwarp --in out/synth/ball_raw_pressed.ppm --quad " + quad + " --out out/unwarp/pressed.ppm"},
        {"unwarp-ref", "unwarp --in out/synth/ball_raw_reference.ppm --quad " + quad + " --out out/unwarp/reference.ppm"},
        {"localize", "localize --in out/unwarp/pressed.ppm --ref out/unwarp/reference.ppm --out out/localize/mask.ppm "
                     "--csv out/localize/contact.csv --diff out/localize/diff.ppm"},
        {"metrics", "metrics --mask out/localize/mask.ppm --truth out/synth/ball_truth.ppm --center 120,67.5 "
                    "--name ball --out out/metrics/metrics.csv"},
        {"tensile", "tensile --fixtures out/tensile --summary out/tensile/summary.csv --svg out/tensile/curves.svg"},
        {"classify-corpus", "classify corpus --per-class 20 --out out/corpus"},
        {"classify-fit", "classify fit --data out/corpus --model out/classify/model.json --augment"},
        {"classify-predict", "classify predict --model out/classify/model.json --data out/corpus "
                             "--out out/classify/predictions.csv"},
    };
}

/// Runs the workload under `root`; returns the names of steps that exited nonzero.
inline std::vector<std::string> run_workload(const fs::path& root) {
    fs::remove_all(root);
    fs::create_directories(root / "logs");
    std::vector<std::string> failed;
    for (const auto& s : workload())
        if (run(root, "--seed 42 " + s.args, root / "logs" / (s.name + ".log")) != 0) failed.push_back(s.name);
    return failed;
}

}  // namespace cli_support

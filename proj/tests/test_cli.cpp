// End-to-end runs of the srsdi_cli binary on a tiny configuration.

#include "srsdi/srsdi.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace srsdi;

namespace {

struct CliRun {
    int code;
    std::string out;
};

CliRun run(const std::string& args) {
    const std::string cmd = std::string(SRSDI_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return {-1, ""};
    std::string out;
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
    const int st = ::pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("srsdi_cli_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        std::ofstream cfg(dir_ / "tiny.cfg");
        cfg << "io.out_dir = " << (dir_ / "runs").string() << "\n"
            << "channel.n_subcarriers = 16\nchannel.n_antennas = 2\nchannel.n_examples = 8\n"
            << "model.patch_h = 2\nmodel.patch_w = 2\nmodel.embed = 16\nmodel.heads = 2\n"
            << "model.depth_enc = 1\nmodel.depth_dec = 1\ntrain.epochs = 2\ntrain.batch_size = 4\n"
            << "ve.L = 20\nvp.L = 20\nsweep.n_seeds = 2\nsweep.snr_grid = 0, 20\nsweep.r_grid = 0, 50\n";
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string cfg() const { return "-c " + (dir_ / "tiny.cfg").string(); }
    fs::path dir_;
};

}  // namespace

TEST_F(Cli, PrintDefaultsIsAValidConfig) {
    const CliRun r = run("config print-defaults");
    ASSERT_EQ(r.code, 0);
    std::istringstream is(r.out);
    ExperimentConfig c;
    c.merge_text(is);
    EXPECT_EQ(c.hash(), ExperimentConfig{}.hash());
}

TEST_F(Cli, ConfigErrorsExitTwo) {
    EXPECT_EQ(run("gen " + cfg() + " --set bogus.key=1").code, 2);
    EXPECT_EQ(run("gen " + cfg() + " --set train.epochs=x").code, 2);
    EXPECT_EQ(run("sweep nope " + cfg()).code, 2);
    EXPECT_EQ(run("gen -c " + (dir_ / "missing.cfg").string()).code, 2);
    EXPECT_EQ(run("gen " + cfg() + " --set io.scale=paper").code, 2);
}

TEST_F(Cli, GenIsDeterministic) {
    const CliRun a = run("gen " + cfg());
    const CliRun b = run("gen " + cfg());
    ASSERT_EQ(a.code, 0);
    ASSERT_EQ(b.code, 0);
    const fs::path da = first_line(a.out), db = first_line(b.out);
    ASSERT_NE(da, db);
    EXPECT_EQ(load_grids((da / "dataset.chgrid").string()).size(), 8u);
    EXPECT_EQ(slurp(da / "dataset.chgrid"), slurp(db / "dataset.chgrid"));
    EXPECT_EQ(slurp(da / "manifest.txt"), slurp(db / "manifest.txt"));
    EXPECT_NE(slurp(da / "config.cfg").find("channel.n_subcarriers = 16"), std::string::npos);
    EXPECT_EQ(load_masks((da / "user_masks.chgrid").string()).size(), 4u);
}

TEST_F(Cli, TrainWritesLogAndRefusesOverwrite) {
    const std::string ck = (dir_ / "m.ckpt").string();
    const CliRun a = run("train " + cfg() + " --checkpoint " + ck);
    ASSERT_EQ(a.code, 0);
    ASSERT_TRUE(fs::exists(ck));
    std::size_t epochs = 0;
    std::istringstream is(a.out);
    for (std::string line; std::getline(is, line);) epochs += line.rfind("epoch ", 0) == 0;
    EXPECT_EQ(epochs, 2u);
    std::size_t logs = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir_ / "runs")) {
        if (e.path().filename() != "loss.csv") continue;
        ++logs;
        const std::string text = slurp(e.path());
        EXPECT_EQ(text.rfind("epoch,mean_loss,wall_seconds\n", 0), 0u);
        EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
    }
    EXPECT_EQ(logs, 1u);
    EXPECT_NE(run("train " + cfg() + " --checkpoint " + ck).code, 0);
    EXPECT_EQ(run("train " + cfg() + " --checkpoint " + ck + " --force").code, 0);
    const CliRun inf = run("infer " + cfg() + " --checkpoint " + ck + " --method one_step");
    ASSERT_EQ(inf.code, 0);
    EXPECT_EQ(inf.out.rfind("nmse_db ", 0), 0u);
}

TEST_F(Cli, OracleInferIsReproducible) {
    const std::string est = (dir_ / "est.chgrid").string();
    const CliRun a = run("infer " + cfg() + " --oracle --index 3 -o " + est);
    const CliRun b = run("infer " + cfg() + " --oracle --index 3");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(load_grids(est).front().n_subcarriers(), 16u);
}

TEST_F(Cli, SweepDryRunAndOracleSweep) {
    const CliRun d = run("sweep masking_sweep " + cfg() + " --dry-run");
    ASSERT_EQ(d.code, 0);
    EXPECT_EQ(std::count(d.out.begin(), d.out.end(), '\n'), 4);
    const CliRun s = run("sweep masking_sweep " + cfg() + " --oracle");
    ASSERT_EQ(s.code, 0);
    const fs::path out = first_line(s.out);
    const auto recs = load_csv((out / "results.csv").string());
    EXPECT_EQ(recs.size(), 2u * 2u * 2u * 2u);
    EXPECT_TRUE(fs::exists(out / "aggregate.csv"));
    EXPECT_TRUE(fs::exists(out / "regions.csv"));
    const CliRun rep = run("report " + (out / "results.csv").string());
    ASSERT_EQ(rep.code, 0);
    EXPECT_EQ(std::count(rep.out.begin(), rep.out.end(), '\n'), 1 + 8);
}

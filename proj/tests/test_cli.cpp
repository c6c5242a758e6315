#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef AMOEBOT_CLI
#define AMOEBOT_CLI "./amoebot"
#endif
#ifndef AMOEBOT_BASELINES
#define AMOEBOT_BASELINES "bench_baselines.json"
#endif

namespace {

int run(const std::string& args, std::string* output = nullptr) {
    std::string cmd = std::string(AMOEBOT_CLI) + " " + args;
    if (output) {
        cmd += " > /tmp/amoebot_cli_test.out 2>&1";
        int rc = std::system(cmd.c_str());
        std::ifstream in("/tmp/amoebot_cli_test.out");
        std::ostringstream buf;
        buf << in.rdbuf();
        *output = buf.str();
        return WEXITSTATUS(rc);
    }
    cmd += " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST(Cli, GenRunCheckRender) {
    ASSERT_EQ(run("gen --seed 11 -n 80 -k 3 -l 6 -o /tmp/cli_a.amb"), 0);
    std::string out;
    ASSERT_EQ(run("run spf /tmp/cli_a.amb --check -o /tmp/cli_a.forest", &out), 0);
    EXPECT_NE(out.find("verdict: ok"), std::string::npos) << out;
    ASSERT_EQ(run("render /tmp/cli_a.amb --forest /tmp/cli_a.forest -o "
                  "/tmp/cli_a.svg"),
              0);
    std::string svg = slurp("/tmp/cli_a.svg");
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("marker-end"), std::string::npos);
}

TEST(Cli, SptRunOnLine) {
    {
        std::ofstream f("/tmp/cli_line.amb");
        f << "0 0 SL\n1 0\n2 0\n3 0 D\n";
    }
    std::string out;
    ASSERT_EQ(run("run spt /tmp/cli_line.amb --check --format machine", &out), 0);
    EXPECT_NE(out.find("\"verdict\": \"ok\""), std::string::npos) << out;
}

TEST(Cli, ParseErrorsExitTwo) {
    {
        std::ofstream f("/tmp/cli_bad.amb");
        f << "0 0 SX\n";
    }
    EXPECT_EQ(run("run spt /tmp/cli_bad.amb"), 2);
    EXPECT_EQ(run("run spt /tmp/does_not_exist.amb"), 2);
    EXPECT_EQ(run("gen --seed 1 -n 0"), 2);
}

TEST(Cli, ValidationFaultsExitThree) {
    {
        std::ofstream f("/tmp/cli_disc.amb");
        f << "0 0 SL\n5 5 D\n";
    }
    EXPECT_EQ(run("run spf /tmp/cli_disc.amb"), 3);
}

TEST(Cli, DeterministicMachineOutput) {
    ASSERT_EQ(run("gen --seed 7 -n 120 -k 4 -l 8 -o /tmp/cli_d.amb"), 0);
    std::string a, b;
    ASSERT_EQ(run("run spf /tmp/cli_d.amb --seed 7 --format machine", &a), 0);
    ASSERT_EQ(run("run spf /tmp/cli_d.amb --seed 7 --format machine", &b), 0);
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a.empty());
}

TEST(Cli, GenDeterministicBytes) {
    ASSERT_EQ(run("gen --seed 42 -n 70 -k 2 -l 3 -o /tmp/cli_g1.amb"), 0);
    ASSERT_EQ(run("gen --seed 42 -n 70 -k 2 -l 3 -o /tmp/cli_g2.amb"), 0);
    EXPECT_EQ(slurp("/tmp/cli_g1.amb"), slurp("/tmp/cli_g2.amb"));
}

TEST(Cli, TraceOutputIsWellFormed) {
    {
        std::ofstream f("/tmp/cli_tr.amb");
        f << "0 0 SL\n1 0\n2 0 D\n";
    }
    ASSERT_EQ(run("run spt /tmp/cli_tr.amb --trace /tmp/cli_tr.jsonl"), 0);
    std::ifstream in("/tmp/cli_tr.jsonl");
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        EXPECT_NE(line.find("\"round\""), std::string::npos);
        EXPECT_NE(line.find("\"circuits\""), std::string::npos);
    }
    EXPECT_GT(lines, 0);
}

TEST(Cli, BenchAgainstBaselines) {
    std::string args = std::string("bench spsp --baseline ") + AMOEBOT_BASELINES;
    std::string out;
    EXPECT_EQ(run(args, &out), 0) << out;
    EXPECT_NE(out.find("baseline ok"), std::string::npos) << out;
}

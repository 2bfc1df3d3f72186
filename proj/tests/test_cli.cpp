#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

struct CliRun {
    int code = -1;
    std::string output;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("fcm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
        write("quick.cfg", "classifier = FCMMC\nd = 2\nlambda = 1\nepochs = 200\nbs = -1\noptimizer = adam\nlr = 0.05\n");
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

    std::string read(const std::string& name) const {
        std::ifstream in(path(name));
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    CliRun run(const std::string& args) const {
        const std::string log = path("out.log");
        const std::string cmd = std::string(FCM_CLI_PATH) + " " + args + " > " + log + " 2>&1";
        const int status = std::system(cmd.c_str());
        CliRun r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.output = read("out.log");
        return r;
    }

    static std::string iris() { return std::string(FCM_DATA_DIR) + "/iris.csv"; }

    fs::path dir_;
};

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text) {
        n += c == '\n' ? 1 : 0;
    }
    return n;
}

TEST_F(Cli, TrainPredictTransformRoundTrip) {
    const auto train = run("train --data " + iris() + " --config " + path("quick.cfg") + " --model-out " + path("m.model"));
    ASSERT_EQ(train.code, 0) << train.output;
    EXPECT_NE(train.output.find("training accuracy"), std::string::npos);

    const auto pred = run("predict --model " + path("m.model") + " --data " + iris() + " --out " + path("p.csv"));
    ASSERT_EQ(pred.code, 0) << pred.output;
    const std::string labels = read("p.csv");
    EXPECT_EQ(count_lines(labels), 151);
    EXPECT_EQ(labels.rfind("label\n", 0), 0u);
    EXPECT_NE(labels.find("setosa"), std::string::npos);

    const auto tr = run("transform --model " + path("m.model") + " --data " + iris() + " --out " + path("t.csv"));
    ASSERT_EQ(tr.code, 0) << tr.output;
    const std::string t = read("t.csv");
    EXPECT_EQ(t.substr(0, t.find('\n')), "c0,c1,c2,c3,c4,c5,c6");
    EXPECT_EQ(count_lines(t), 151);
}

TEST_F(Cli, CrossvalReportIsReproducible) {
    const std::string args = "crossval --data " + iris() + " --config " + path("quick.cfg") + " --folds 3 --seed 4 --report ";
    ASSERT_EQ(run(args + path("a.json")).code, 0);
    ASSERT_EQ(run(args + path("b.json")).code, 0);
    EXPECT_EQ(read("a.json"), read("b.json"));
    EXPECT_NE(read("a.json").find("\"dataset\": \"iris\""), std::string::npos);
}

TEST_F(Cli, BadConfigKeyIsUsageError) {
    write("bad.cfg", "depth = 3\n");
    const auto r = run("train --data " + iris() + " --config " + path("bad.cfg") + " --model-out " + path("m.model"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("depth"), std::string::npos);
}

TEST_F(Cli, UnknownFlagIsUsageError) { EXPECT_EQ(run("train --bogus").code, 1); }

TEST_F(Cli, UnwritableOutputIsDataError) {
    const auto r = run("train --data " + iris() + " --config " + path("quick.cfg") + " --model-out /nonexistent-dir/m.model");
    EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, MissingDataIsDataError) {
    EXPECT_EQ(run("train --data " + path("none.csv") + " --config " + path("quick.cfg") + " --model-out " + path("m")).code, 2);
}

TEST_F(Cli, ModelVersionMismatchIsRejected) {
    ASSERT_EQ(run("train --data " + iris() + " --config " + path("quick.cfg") + " --model-out " + path("m.model")).code, 0);
    std::string text = read("m.model");
    text.replace(0, text.find('\n'), "fcm-model v9");
    write("v9.model", text);
    const auto r = run("predict --model " + path("v9.model") + " --data " + iris());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("v9"), std::string::npos);
}

TEST_F(Cli, PredictRejectsWrongFeatureCount) {
    ASSERT_EQ(run("train --data " + iris() + " --config " + path("quick.cfg") + " --model-out " + path("m.model")).code, 0);
    write("two.csv", "a,b\n1,2\n");
    const auto r = run("predict --model " + path("m.model") + " --data " + path("two.csv"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("n = 4"), std::string::npos);
}

TEST_F(Cli, Gradcheck) {
    const auto ok = run("gradcheck --trials 10 --seed 3");
    EXPECT_EQ(ok.code, 0) << ok.output;
    EXPECT_NE(ok.output.find("PASS"), std::string::npos);
    EXPECT_EQ(run("gradcheck --variant FCMB --d 1 --trials 5").code, 0);
    EXPECT_EQ(run("gradcheck --n 17").code, 1);
    EXPECT_EQ(run("gradcheck --variant FCMB --k 3").code, 1);
}

} // namespace

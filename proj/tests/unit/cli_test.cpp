#include "epitrack/api.hpp"
#include "support/test_support.hpp"

#include "httplib.h"
#include "json.hpp"

#include <gtest/gtest.h>

#include <csignal>
#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <future>
#include <sstream>

extern char** environ;

using namespace epitrack;
using epitrack::testing::fixture;
using epitrack::testing::run_cli;
using epitrack::testing::TempDir;
using nlohmann::json;

namespace {

std::string world_source() {
    return "dxy_json=" + fixture(epitrack::testing::world_fixture_name).string();
}

std::string tables() {
    return epitrack::testing::tables_dir().string();
}

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

/// The CLI binary running `serve` in a child process.
class ServeProcess {
public:
    explicit ServeProcess(const std::vector<std::string>& args) {
        int fds[2];
        if (::pipe(fds) != 0) throw std::runtime_error("pipe");
        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init(&actions);
        posix_spawn_file_actions_adddup2(&actions, fds[1], 1);
        posix_spawn_file_actions_addclose(&actions, fds[0]);
        std::vector<std::string> full{EPITRACK_CLI_PATH};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<char*> argv;
        for (auto& a : full) argv.push_back(a.data());
        argv.push_back(nullptr);
        if (posix_spawn(&pid_, EPITRACK_CLI_PATH, &actions, nullptr, argv.data(), environ) != 0)
            throw std::runtime_error("spawn");
        posix_spawn_file_actions_destroy(&actions);
        ::close(fds[1]);
        out_ = fds[0];
    }
    ~ServeProcess() {
        if (pid_ > 0) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, nullptr, 0);
        }
        ::close(out_);
    }

    /// Next stdout line, or empty on timeout/EOF.
    std::string read_line(int timeout_ms = 10000) {
        while (true) {
            if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            pollfd p{out_, POLLIN, 0};
            if (::poll(&p, 1, timeout_ms) <= 0) return {};
            char chunk[4096];
            const ssize_t n = ::read(out_, chunk, sizeof chunk);
            if (n <= 0) return {};
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    void signal(int sig) { ::kill(pid_, sig); }

    /// Exit code, or -1 if it did not exit normally within the timeout.
    int wait(int timeout_ms = 10000) {
        for (int waited = 0; waited < timeout_ms; waited += 20) {
            int status = 0;
            if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
        return -1;
    }

private:
    pid_t pid_ = -1;
    int out_ = -1;
    std::string buffer_;
};

} // namespace

TEST(Cli, NoSubcommandIsUsageError) {
    EXPECT_EQ(run_cli({}).code, 64);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 64);
}

TEST(Cli, IngestWithoutSourceIsUsageError) {
    TempDir dir;
    EXPECT_EQ(run_cli({"ingest", "--data-dir", dir.path().string()}).code, 64);
    EXPECT_EQ(run_cli({"ingest", "--data-dir", dir.path().string(), "--source", "bogus"}).code, 64);
}

TEST(Cli, IngestCanonicalFixture) {
    TempDir dir;
    const auto r = run_cli({"ingest", "--data-dir", dir.path().string(), "--tables-dir", tables(), "--source",
                            "canonical_csv=" + fixture("canonical_sample.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = json::parse(r.out);
    EXPECT_GT(report["rows"].get<int>(), 0);
    EXPECT_EQ(report["version_id"], 1);
}

TEST(Cli, SecondIngestReportsNoValueChanges) {
    TempDir dir;
    const std::vector<std::string> args{"ingest", "--data-dir", dir.path().string(), "--tables-dir", tables(),
                                        "--source", world_source()};
    const auto first = run_cli(args);
    ASSERT_EQ(first.code, 0) << first.err;
    EXPECT_GT(json::parse(first.out)["value_changes"].get<int>(), 0);
    const auto second = run_cli(args);
    ASSERT_EQ(second.code, 0) << second.err;
    EXPECT_EQ(json::parse(second.out)["value_changes"], 0);
    EXPECT_EQ(json::parse(second.out)["version_id"], 2);
}

TEST(Cli, IngestUnusableDataDirIsEnvironmentFailure) {
    TempDir dir;
    epitrack::testing::write_text(dir.path() / "plain-file", "x");
    const auto r = run_cli({"ingest", "--data-dir", (dir.path() / "plain-file").string(), "--source", world_source()});
    EXPECT_EQ(r.code, 2);
    ::unsetenv("EPITRACK_DATA_DIR");
    EXPECT_EQ(run_cli({"ingest", "--source", world_source()}).code, 2);
}

TEST(Cli, IngestAllSourcesFailingIsEnvironmentFailure) {
    TempDir dir;
    const auto r = run_cli({"ingest", "--data-dir", dir.path().string(), "--tables-dir", tables(), "--source",
                            "canonical_csv=/nonexistent/x.csv"});
    EXPECT_EQ(r.code, 2);
}

TEST(Cli, DataDirFromEnvironment) {
    TempDir dir;
    ::setenv("EPITRACK_DATA_DIR", dir.path().string().c_str(), 1);
    const auto r = run_cli({"ingest", "--tables-dir", tables(), "--source",
                            "canonical_csv=" + fixture("canonical_sample.csv").string()});
    ::unsetenv("EPITRACK_DATA_DIR");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "versions.log"));
}

TEST(Cli, ExportMatchesSeriesEndpoint) {
    TempDir dir;
    ASSERT_EQ(run_cli({"ingest", "--data-dir", dir.path().string(), "--tables-dir", tables(), "--source", world_source()}).code, 0);
    const auto r = run_cli({"export", "--data-dir", dir.path().string(), "--tables-dir", tables(), "--region", "CN",
                            "--metric", "confirmed"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto lines = csv_lines(r.out);
    ASSERT_GT(lines.size(), 1u);
    EXPECT_EQ(lines[0], "date,confirmed");

    Store store(epitrack::testing::world_version());
    const api::Service svc(store);
    const auto doc = json::parse(svc.handle("/api/v1/regions/CN/series", {}).body);
    ASSERT_EQ(lines.size(), doc["points"].size() + 1);
    for (std::size_t i = 0; i < doc["points"].size(); ++i) {
        const auto& p = doc["points"][i];
        EXPECT_EQ(lines[i + 1], p["date"].get<std::string>() + "," + p["confirmed"].dump());
    }
}

TEST(Cli, ExportUnknownRegionIsDomainFailure) {
    TempDir dir;
    ASSERT_EQ(run_cli({"ingest", "--data-dir", dir.path().string(), "--tables-dir", tables(), "--source", world_source()}).code, 0);
    EXPECT_EQ(run_cli({"export", "--data-dir", dir.path().string(), "--tables-dir", tables(), "--region", "QQ"}).code, 1);
    EXPECT_EQ(run_cli({"export", "--data-dir", dir.path().string(), "--tables-dir", tables(), "--region", "not a region"}).code, 1);
}

TEST(Cli, ExportWithoutRecordsIsHeaderOnly) {
    TempDir dir;
    const auto r = run_cli({"export", "--data-dir", dir.path().string(), "--tables-dir", tables(), "--region", "IT",
                            "--metric", "confirmed", "--metric", "deaths"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "date,confirmed,deaths\n");
}

TEST(Cli, ValidateReports) {
    const auto ok = run_cli({"validate", "--tables-dir", tables(), "--source",
                             "canonical_csv=" + fixture("canonical_sample.csv").string()});
    EXPECT_EQ(ok.code, 0) << ok.err;

    const auto neg = run_cli({"validate", "--tables-dir", tables(), "--source",
                              "canonical_csv=" + fixture("canonical_negative.csv").string()});
    EXPECT_EQ(neg.code, 1);
    EXPECT_EQ(json::parse(neg.out)["errors"][0]["line"], 3);
    EXPECT_NE(neg.err.find(":3:"), std::string::npos);

    const auto unknown = run_cli({"validate", "--tables-dir", tables(), "--source",
                                  "canonical_csv=" + fixture("canonical_unknown.csv").string()});
    EXPECT_EQ(unknown.code, 0);
    EXPECT_EQ(json::parse(unknown.out)["quarantined"], 1);
}

TEST(Cli, ServeHealthzAndCleanInterrupt) {
    TempDir dir;
    ServeProcess proc({"serve", "--listen", "127.0.0.1:0", "--data-dir", dir.path().string(), "--tables-dir", tables()});
    const std::string line = proc.read_line();
    ASSERT_FALSE(line.empty());
    const auto event = json::parse(line);
    ASSERT_EQ(event["event"], "listening");
    httplib::Client cli("127.0.0.1", event["port"].get<int>());
    const auto health = cli.Get("/healthz");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    const auto summary = cli.Get("/api/v1/summary");
    ASSERT_TRUE(summary);
    EXPECT_EQ(json::parse(summary->body)["total_confirmed"], 0);

    proc.signal(SIGINT);
    EXPECT_EQ(json::parse(proc.read_line())["event"], "stopped");
    EXPECT_EQ(proc.wait(), 0);
}

TEST(Cli, ServeInterruptDuringRequestCompletesIt) {
    TempDir dir;
    ASSERT_EQ(run_cli({"ingest", "--data-dir", dir.path().string(), "--tables-dir", tables(), "--source", world_source()}).code, 0);
    ServeProcess proc({"serve", "--listen", "127.0.0.1:0", "--data-dir", dir.path().string(), "--tables-dir", tables(),
                       "--threads", "4"});
    const auto event = json::parse(proc.read_line());
    const int port = event["port"].get<int>();
    // Many concurrent requests so that some are in flight when the signal lands.
    std::vector<std::future<int>> inflight;
    for (int i = 0; i < 8; ++i)
        inflight.push_back(std::async(std::launch::async, [port] {
            httplib::Client cli("127.0.0.1", port);
            const auto res = cli.Get("/api/v1/regions/CN/series");
            return res ? res->status : -1;
        }));
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    proc.signal(SIGTERM);
    for (auto& f : inflight) {
        const int status = f.get();
        EXPECT_TRUE(status == 200 || status == -1) << status;
    }
    EXPECT_EQ(proc.wait(), 0);
}

TEST(Cli, ServePortInUseIsEnvironmentFailure) {
    httplib::Server blocker;
    const int port = blocker.bind_to_any_port("127.0.0.1");
    TempDir dir;
    const auto r = run_cli({"serve", "--listen", "127.0.0.1:" + std::to_string(port), "--data-dir", dir.path().string(),
                            "--tables-dir", tables()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("cannot listen"), std::string::npos);
}

TEST(Cli, ServeBadListenIsUsageError) {
    TempDir dir;
    EXPECT_EQ(run_cli({"serve", "--listen", "nonsense", "--data-dir", dir.path().string()}).code, 64);
}

// Exit-code and usage behaviour of the installed CLI binary. The test
// receives the binary path as its first argument (wired up by CMake).

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

namespace {

std::string g_cli_path;

int run_cli(const std::string& args) {
  const std::string cmd = g_cli_path + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WEXITSTATUS(raw);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli_path = argv[1];
  doctest::Context context;
  context.applyCommandLine(1, argv);
  return context.run();
}

TEST_CASE("unknown subcommand exits 1 with usage") {
  REQUIRE_FALSE(g_cli_path.empty());
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("") == 1);
}

TEST_CASE("help exits 0") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("simulate --help") == 0);
}

TEST_CASE("missing config file exits 1") {
  CHECK(run_cli("simulate --config missing.json --out /tmp/x.csv") == 1);
}

TEST_CASE("report on a zero-error synthetic log prints all-zero RMSEs") {
  const char* log_path = "test_cli_zero.csv";
  {
    std::ofstream out(log_path);
    out << "t,s,vx,vy,omega,ye,theta_e,delta,ax,ddelta,dax,v_ref,k,wind,cf_hat,cr_hat,"
           "qp_iters,solve_time,slack\n";
    // vx equals v_ref, all error channels zero
    out << "0,0,10,0,0,0,0,0,0,0,0,10,0,0,120000,100000,5,0.001,0\n";
    out << "0.033,0.33,10,0,0,0,0,0,0,0,0,10,0,0,120000,100000,5,0.001,0\n";
  }
  const std::string out_json = "test_cli_report.json";
  const std::string cmd = g_cli_path + " report --run " + log_path + " > " + out_json + " 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);

  std::ifstream in(out_json);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(all.find("\"rmse_ye\": 0.0") != std::string::npos);
  CHECK(all.find("\"rmse_vx\": 0.0") != std::string::npos);
  std::remove(log_path);
  std::remove(out_json.c_str());
}

TEST_CASE("report on a missing run exits 1") {
  CHECK(run_cli("report --run nothing_here.csv") == 1);
}

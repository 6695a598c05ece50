// End-to-end checks of the command-line tool through a shell.

#include <array>
#include <cstdio>
#include <iostream>
#include <string>

namespace {

int failures = 0;

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(NEFLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    out.append(buf.data(), n);
  int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

void check(bool ok, const std::string& what) {
  std::cout << (ok ? "ok" : "FAIL") << ": " << what << "\n";
  if (!ok) ++failures;
}

}  // namespace

int main() {
  auto list = run("catalog list");
  int lines = 0;
  for (char c : list.out)
    if (c == '\n') ++lines;
  check(list.exit_code == 0 && lines == 7, "catalog list prints 7 ids");

  auto show = run("catalog show gamma --param shape=2");
  check(show.exit_code == 0 &&
            show.out.find("\"name\": \"gamma\"") != std::string::npos,
        "catalog show emits a descriptor");

  auto ev = run("eval --family poisson --theta 0 --m 1");
  check(ev.exit_code == 0 && ev.out.find("\"psi\"") != std::string::npos,
        "eval reports cumulant and mean-side values");

  auto bad = run("eval --family no-such-family");
  check(bad.exit_code == 1, "unknown family exits 1");

  auto tr = run("transform --family normal --beta 1");
  check(tr.exit_code == 0 &&
            tr.out.find("\"kind\": \"transformed\"") != std::string::npos,
        "transform emits a transformed descriptor");

  auto vf = run("verify --family inverse-gaussian --beta auto");
  check(vf.exit_code == 0 &&
            vf.out.find("\"overall_pass\": false") != std::string::npos,
        "verify classifies raw m^3 as non-passing");

  auto vf2 = run("verify --family poisson");
  check(vf2.exit_code == 0 &&
            vf2.out.find("\"overall_pass\": true") != std::string::npos,
        "verify accepts a Morris family in quadratic mode");

  auto vf3 = run("verify --family poisson --seed 42");
  auto vf4 = run("verify --family poisson --seed 42");
  check(vf3.exit_code == 0 && vf3.out == vf4.out,
        "verify output is deterministic");

  auto ode = run("ode match --poly 0,1,2,1 --beta 1");
  check(ode.exit_code == 0 &&
            ode.out.find("\"member\": true") != std::string::npos,
        "ode match accepts m(1+m)^2 at beta=1");

  auto sing = run("ode integrate --beta 1 --v0 1 --span=-2,0");
  check(sing.exit_code == 2, "integration across the singular point exits 2");

  auto bat = run("battery");
  check(bat.exit_code == 0 &&
            bat.out.find("\"all_agree\": true") != std::string::npos,
        "battery agrees and exits 0");

  auto schema = run("--schema");
  check(schema.exit_code == 0 &&
            schema.out.find("\"descriptor\"") != std::string::npos,
        "schema is printed");

  if (failures) {
    std::cout << failures << " CLI checks failed\n";
    return 1;
  }
  std::cout << "all CLI checks passed\n";
  return 0;
}

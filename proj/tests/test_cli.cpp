#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hanr/wav.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "hanr_cli_test";

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const char* cli = std::getenv("HANR_CLI");
  REQUIRE(cli != nullptr);
  const fs::path log = kWork / "last_output.txt";
  const std::string cmd = std::string(cli) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream is(log);
  std::stringstream ss;
  ss << is.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string p(const fs::path& x) { return x.string(); }

void write_small_config(const fs::path& path) {
  std::ofstream os(path);
  os << R"({
  "profile": "desk_scale",
  "context": {"tau1_frames": 4, "tau2_frames": 2},
  "network": {"hidden_width": 16, "hidden_layers": 2},
  "train": {"epochs": 1, "learning_rate": 0.001, "rng_seed": 5},
  "mix": {"mixtures_train": 3, "mixtures_val": 1, "mixtures_test": 2, "seed": 3},
  "synth": {"num_speech": 10, "num_noise": 10, "speech_seconds": 2.5, "noise_seconds": 4.0, "seed": 2}
})";
}

}  // namespace

TEST_CASE("argument and configuration errors exit with code 2") {
  fs::create_directories(kWork);
  CHECK(run("").code == 2);
  CHECK(run("no-such-command").code == 2);
  CHECK(run("fbank-check --tau2 3").code == 2);
  CHECK(run("fbank-check --profile laptop").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("fbank-check") {
  fs::create_directories(kWork);
  const auto r = run("fbank-check --signals 20 --out " + p(kWork / "fbank.csv"));
  CHECK(r.code == 0);
  CHECK(r.out.find("group_delay_samples=95") != std::string::npos);
  CHECK(r.out.find("total_latency_samples=143") != std::string::npos);
  std::ifstream is(kWork / "fbank.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "signal,length,error_db");

  const auto wide = run("fbank-check --signals 2 --window-len 192");
  CHECK(wide.code == 2);
  CHECK(wide.out.find("group_delay_samples=191") != std::string::npos);
}

TEST_CASE("mix, features, train, enhance, evaluate") {
  const fs::path w = kWork / "flow";
  fs::remove_all(w);
  fs::create_directories(w);
  const fs::path cfg = w / "small.json";
  write_small_config(cfg);
  const std::string c = " --config " + p(cfg);

  REQUIRE(run("mix --synth --out " + p(w / "data") + c).code == 0);
  CHECK(fs::exists(w / "data" / "manifests.jsonl"));
  CHECK(fs::exists(w / "data" / "manifests.jsonl.meta.json"));
  CHECK(fs::exists(w / "data" / "manifests.jsonl.config.json"));
  CHECK(fs::exists(w / "data" / "mixtures" / "test_0_x.wav"));
  const std::string data = " --corpus " + p(w / "data" / "corpus") + " --manifests " +
                           p(w / "data" / "manifests.jsonl");

  REQUIRE(run("features" + data + c + " --out " + p(w / "train.hadf")).code == 0);
  REQUIRE(run("features" + data + c + " --split val --out " + p(w / "val.hadf")).code == 0);
  CHECK(run("train" + c + " --tau1 5 --features " + p(w / "train.hadf") + " --model " +
            p(w / "bad.hadm")).code == 2);
  const auto tr = run("train" + c + " --features " + p(w / "train.hadf") + " --val-features " +
                      p(w / "val.hadf") + " --model " + p(w / "model.hadm"));
  REQUIRE(tr.code == 0);
  CHECK(tr.out.find("epoch   1") != std::string::npos);
  {
    std::ifstream is(w / "model.loss.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header == "epoch,train_rmse,val_rmse");
  }

  const auto enh = run("enhance --model " + p(w / "model.hadm") + " --input " +
                       p(w / "data" / "mixtures" / "test_0_x.wav") + " --output " +
                       p(w / "enhanced.wav"));
  REQUIRE(enh.code == 0);
  CHECK(enh.out.find("latency_samples=143") != std::string::npos);
  CHECK(enh.out.find("realtime_factor=") != std::string::npos);
  CHECK(fs::exists(w / "enhanced.hagt"));
  const auto y = hanr::read_wav(w / "enhanced.wav");
  CHECK(y.samples.size() == hanr::read_wav(w / "data" / "mixtures" / "test_0_x.wav").samples.size());

  const auto ev = run("evaluate" + data + " --model " + p(w / "model.hadm") + " --out " + p(w / "eval"));
  REQUIRE(ev.code == 0);
  {
    std::ifstream is(w / "eval" / "eval.csv");
    std::string header;
    int rows = 0;
    std::getline(is, header);
    for (std::string line; std::getline(is, line);) ++rows;
    CHECK(header == "mixture_id,snr_db,system,stoi,delta_stoi,nr_db,sd_db");
    CHECK(rows == 2 * 5);
  }
  CHECK(fs::exists(w / "eval" / "summary.csv"));
  CHECK(fs::exists(w / "eval" / "eval.meta.json"));

  // Error paths.
  CHECK(run("evaluate" + data + c + " --out " + p(w / "eval2")).code == 2);  // dnn without model
  CHECK(run("evaluate" + data + c + " --systems noisy,magic --out " + p(w / "eval2")).code == 2);
  CHECK(run("evaluate" + data + c + " --systems noisy,baseline --out " + p(w / "eval2")).code == 0);

  hanr::write_wav(w / "wrong_rate.wav", hanr::Signal(1600, 0.0), 16000);
  CHECK(run("enhance --model " + p(w / "model.hadm") + " --input " + p(w / "wrong_rate.wav") +
            " --output " + p(w / "o.wav")).code == 2);
  {
    std::ofstream os(w / "broken.hadm", std::ios::binary);
    os << "HADM";
  }
  CHECK(run("enhance --model " + p(w / "broken.hadm") + " --config " + p(cfg) + " --input " +
            p(w / "data" / "mixtures" / "test_0_x.wav") + " --output " + p(w / "o.wav")).code == 3);
  fs::remove_all(w);
}

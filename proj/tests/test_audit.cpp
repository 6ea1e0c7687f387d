#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smart/audit.hpp"
#include "smart/errors.hpp"
#include "smart/synth.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace smart;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Workspace {
    fs::path dir;
    std::string data_csv;
    std::string fixtures;

    explicit Workspace(const std::string& name) {
        dir = fs::temp_directory_path() / name;
        fs::remove_all(dir);
        fs::create_directories(dir);

        SynthConfig config;
        config.n_rows = 1200;
        config.seed = 99;
        Dataset ds = gen_recidivism(config);
        data_csv = (dir / "recidivism.csv").string();
        write_csv(ds, data_csv);

        // feasibility, boolean, generation, operationalization
        nlohmann::json responses = nlohmann::json::array();
        responses.push_back("Age, income and education plausibly relate to recidivism risk.");
        responses.push_back("yes");
        responses.push_back(
            "Hypothesis 1: The model performs worse for older individuals.\n"
            "Justification: Fewer older individuals recidivate, so the boundary is thin there.\n"
            "\n"
            "Hypothesis 2: The model performs worse for the low income group.\n"
            "Justification: Income interacts with unobserved factors.\n"
            "\n"
            "Hypothesis 3: The model performs worse for the white subgroup.\n"
            "Justification: Subgroup base rates differ.\n");
        responses.push_back("{0: 'age > 55', 1: 'income == \"low\"', 2: 'race == \"white\"'}");
        fixtures = (dir / "fixtures.json").string();
        std::ofstream out(fixtures);
        out << responses.dump(2);
    }
};

RunConfig base_config(const Workspace& ws, const std::string& out_dir) {
    RunConfig config;
    config.data_path = ws.data_csv;
    config.target = "recidivism";
    config.fit_logistic_model = true;
    config.provider_kind = "scripted";
    config.fixtures_path = ws.fixtures;
    config.n_hypotheses = 3;
    config.test.bootstrap_b = 300;
    config.seed = 5;
    config.out_dir = out_dir;
    config.verbosity = -1;
    return config;
}

} // namespace

TEST_CASE("a scripted audit is deterministic end to end") {
    Workspace ws("smart_audit_ws");

    RunConfig config_a = base_config(ws, (ws.dir / "out_a").string());
    AuditOutcome a = run_audit(config_a);
    CHECK(a.exit_code == kExitOk);
    REQUIRE(a.report.rows.size() == 3);
    CHECK(a.report.metrics.size() == 3);
    CHECK(fs::exists(a.paths.markdown));
    CHECK(fs::exists(a.paths.machine));
    CHECK(fs::exists(a.paths.transcript));

    RunConfig config_b = base_config(ws, (ws.dir / "out_b").string());
    AuditOutcome b = run_audit(config_b);

    CHECK(slurp(a.paths.markdown) == slurp(b.paths.markdown));
    CHECK(slurp(a.paths.machine) == slurp(b.paths.machine));

    // the machine file reconstructs the rows exactly
    AuditReport parsed = parse_machine(slurp(a.paths.machine));
    REQUIRE(parsed.rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(parsed.rows[i].p_value == a.report.rows[i].p_value);
        CHECK(parsed.rows[i].operationalization == a.report.rows[i].operationalization);
    }
}

TEST_CASE("the nsf ablation keeps provider order and drops p-values") {
    Workspace ws("smart_audit_nsf");
    RunConfig config = base_config(ws, (ws.dir / "out_nsf").string());
    config.nsf = true;
    AuditOutcome outcome = run_audit(config);
    REQUIRE(outcome.report.rows.size() == 3);
    CHECK(outcome.report.nsf);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(outcome.report.rows[i].hypothesis_id == static_cast<int>(i));
        CHECK(outcome.report.rows[i].evidence == Evidence::Untested);
        CHECK(std::isnan(outcome.report.rows[i].p_value));
    }
    const std::string md = slurp(outcome.paths.markdown);
    CHECK(md.find("no-self-falsification") != std::string::npos);
}

TEST_CASE("config validation rejects ambiguous prediction sources") {
    Workspace ws("smart_audit_cfg");
    RunConfig config = base_config(ws, "");
    config.fit_logistic_model = false; // now zero sources
    CHECK_THROWS_AS(run_audit(config), ConfigError);

    config.fit_logistic_model = true;
    config.pred_col = "recidivism"; // two sources
    CHECK_THROWS_AS(run_audit(config), ConfigError);

    RunConfig provider_less = base_config(ws, "");
    provider_less.fixtures_path.clear();
    CHECK_THROWS_AS(run_audit(provider_less), ConfigError);
}

TEST_CASE("feasibility=no produces the zero-slice report and strict exit") {
    Workspace ws("smart_audit_gate");
    nlohmann::json responses = nlohmann::json::array();
    responses.push_back("No covariate could plausibly relate to the outcome.");
    responses.push_back("no");
    std::ofstream(ws.fixtures) << responses.dump();

    RunConfig config = base_config(ws, (ws.dir / "out_gate").string());
    config.strict = true;
    AuditOutcome outcome = run_audit(config);
    CHECK(outcome.exit_code == kExitNoSlicesStrict);
    CHECK_FALSE(outcome.report.feasible);
    CHECK(outcome.report.rows.empty());
    CHECK(slurp(outcome.paths.markdown).find("Zero slices were tested") != std::string::npos);
}

TEST_CASE("file and scripted audits never construct a transport") {
    struct CanaryTransport : Transport {
        bool touched = false;
        HttpResponse post(const std::string&,
                          const std::vector<std::pair<std::string, std::string>>&,
                          const std::string&, std::chrono::milliseconds) override {
            touched = true;
            return {500, "network call during a hermetic audit"};
        }
    };
    struct ForwardingTransport : Transport {
        explicit ForwardingTransport(Transport* inner) : inner(inner) {}
        Transport* inner;
        HttpResponse post(const std::string& url,
                          const std::vector<std::pair<std::string, std::string>>& headers,
                          const std::string& body, std::chrono::milliseconds timeout) override {
            return inner->post(url, headers, body, timeout);
        }
    };

    Workspace ws("smart_audit_hermetic");
    RunConfig config = base_config(ws, "");
    // make_provider for scripted/file kinds ignores the transport entirely
    CanaryTransport canary;
    auto provider = make_provider(config, std::make_unique<ForwardingTransport>(&canary));
    AuditOutcome outcome = run_audit(config, std::move(provider));
    CHECK(outcome.exit_code == kExitOk);
    CHECK_FALSE(canary.touched);
    CHECK(outcome.report.transcript_calls == 4);
}

TEST_CASE("data-driven operationalization swaps in optimal splits") {
    Workspace ws("smart_audit_ddo");
    RunConfig config = base_config(ws, "");
    config.data_driven_ops = true;
    config.split_constraints.min_group_size = 30;
    AuditOutcome outcome = run_audit(config);
    REQUIRE(!outcome.report.rows.empty());
    // the age hypothesis is re-operationalized from the data, so its
    // threshold is data-chosen rather than the provider's "55"
    bool age_row_found = false;
    for (const auto& row : outcome.report.rows) {
        if (row.operationalization.find("age") != std::string::npos) age_row_found = true;
    }
    CHECK(age_row_found);
}

// ---- CLI smoke tests (through the installed binary) ---------------------------

namespace {

int run_cli(const std::string& args, std::string* output = nullptr) {
    const char* cli = std::getenv("SMART_CLI");
    REQUIRE(cli != nullptr);
    const std::string out_file =
        (fs::temp_directory_path() / "smart_cli_out.txt").string();
    const std::string cmd = std::string(cli) + " " + args + " > " + out_file + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (output) *output = slurp(out_file);
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("cli: help lists every audit flag and unknown flags are fatal") {
    std::string help;
    CHECK(run_cli("audit --help", &help) == 0);
    for (const char* flag :
         {"--data", "--target", "--pred-col", "--pred-file", "--fit-logistic", "--context",
          "--provider", "--hypotheses", "--fixtures", "--endpoint", "--model", "--temperature",
          "--alpha", "--correction", "--bootstrap-b", "--top-n", "--min-group", "--max-group",
          "--nsf", "--data-driven-ops", "--seed", "--out-dir", "--requirements", "--strict"})
        CHECK(help.find(flag) != std::string::npos);

    std::string err;
    CHECK(run_cli("audit --no-such-flag", &err) == kExitConfig);
}

TEST_CASE("cli: a full scripted audit runs hermetically with exit 0") {
    Workspace ws("smart_cli_ws");
    const std::string out_dir = (ws.dir / "cli_out").string();
    std::string output;
    const int code = run_cli("audit --data " + ws.data_csv +
                                 " --target recidivism --fit-logistic --provider scripted "
                                 "--fixtures " +
                                 ws.fixtures + " --n-hypotheses 3 --bootstrap-b 200 --seed 5 "
                                 "--out-dir " + out_dir,
                             &output);
    CHECK(code == 0);
    CHECK(fs::exists(fs::path(out_dir) / "report.md"));
    CHECK(fs::exists(fs::path(out_dir) / "report.jsonl"));
    CHECK(output.find("Model audit report") != std::string::npos);
}

TEST_CASE("cli: config faults exit 2 without touching a provider") {
    Workspace ws("smart_cli_cfg");
    std::string output;
    const int code = run_cli("audit --data " + ws.data_csv + " --target recidivism", &output);
    CHECK(code == kExitConfig);
    CHECK(output.find("predictions source") != std::string::npos);
}

TEST_CASE("cli: report re-renders markdown from the machine file") {
    Workspace ws("smart_cli_rerender");
    const std::string out_dir = (ws.dir / "out").string();
    RunConfig config = base_config(ws, out_dir);
    AuditOutcome outcome = run_audit(config);

    std::string rendered;
    const int code = run_cli("report --machine " + outcome.paths.machine, &rendered);
    CHECK(code == 0);
    CHECK(rendered == slurp(outcome.paths.markdown));
}

TEST_CASE("cli: metrics and split subcommands answer directly") {
    Workspace ws("smart_cli_tools");
    std::string metrics_out;
    int code = run_cli("metrics --data " + ws.data_csv +
                           " --target recidivism --fit-logistic --seed 3 --query \"age > 50\"",
                       &metrics_out);
    CHECK(code == 0);
    CHECK(metrics_out.find("\"support\"") != std::string::npos);

    std::string split_out;
    code = run_cli("split --data " + ws.data_csv +
                       " --target recidivism --fit-logistic --seed 3 --features age "
                       "--min-group 60 --depth 1",
                   &split_out);
    CHECK(code == 0);
    CHECK(split_out.find("age") != std::string::npos);

    std::string baseline_out;
    code = run_cli("baseline --data " + ws.data_csv +
                       " --target recidivism --fit-logistic --seed 3 --order 1 --bins 5 "
                       "--bootstrap-b 150",
                   &baseline_out);
    CHECK(code == 0);
    CHECK(baseline_out.find("candidates:") != std::string::npos);
}

TEST_CASE("cli: simulate runs hermetically and writes its results table") {
    const std::string out = (fs::temp_directory_path() / "smart_sim_out.json").string();
    std::string text;
    const int code = run_cli(
        "simulate --experiment scenarios --runs 2 --n-rows 300 --seed 3 --out " + out, &text);
    CHECK(code == 0);
    CHECK(text.find("scenario uniform") != std::string::npos);
    nlohmann::json doc = nlohmann::json::parse(slurp(out));
    CHECK(doc["experiment"] == "scenarios");
    CHECK(doc["cells"].size() == 3);

    std::string fnr_text;
    const int fnr_code = run_cli(
        "simulate --experiment fnr --runs 2 --n-corrupted 1 --n-rows 1200 --seed 4", &fnr_text);
    CHECK(fnr_code == 0);
    CHECK(fnr_text.find("fnr n=1") != std::string::npos);

    std::string bad;
    CHECK(run_cli("simulate --experiment nope", &bad) == kExitConfig);
}

TEST_CASE("cli: data faults exit 3") {
    std::string output;
    const int code =
        run_cli("audit --data /nonexistent.csv --target y --fit-logistic --provider scripted "
                "--fixtures /also/nonexistent.json",
                &output);
    CHECK(code == kExitData);
}

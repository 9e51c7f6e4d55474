#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adafed/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"AdaFed federated-learning simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;

    CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
    run->add_option("--config", config_path, "config file path")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed, "override every seed in the config");

    std::vector<std::string> aggregators;
    std::vector<std::uint64_t> seeds;
    CLI::App* compare =
        app.add_subcommand("compare", "run several aggregators on the same tasks and seeds");
    compare->add_option("--config", config_path, "config file path")->required();
    compare->add_option("--out", out_dir, "output directory")->required();
    compare->add_option("--aggregators", aggregators,
                        "aggregator tokens, e.g. adafed:gamma=1 fedavg mgda")
        ->required()
        ->delimiter(',');
    compare->add_option("--seeds", seeds, "seeds to average over")->required()->delimiter(',');

    CLI::App* verify = app.add_subcommand("verify", "run the invariant suites");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return adafed::cmd_run(config_path, out_dir,
                               seed_opt->count() ? std::optional<std::uint64_t>(seed)
                                                 : std::nullopt);
    if (compare->parsed()) return adafed::cmd_compare(config_path, aggregators, seeds, out_dir);
    if (verify->parsed()) return adafed::cmd_verify();
    return 1;
}

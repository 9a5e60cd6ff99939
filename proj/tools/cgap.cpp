// cgap: synthetic-city generation, CGAP training, embedding export, and the
// downstream evaluation protocol, as one reproducible command-line tool.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cgap/dataset_io.hpp"
#include "cgap/manifest.hpp"
#include "cgap/synthetic.hpp"
#include "cgap/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TrainFlags {
    cgap::TrainingConfig cfg;
    std::string attention_mode = "gated";
    std::string pooling = "attention";
    std::string data_mode = "both";
    std::string alphas;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--d", cfg.d, "hidden dimension")->capture_default_str();
        cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate")->capture_default_str();
        cmd->add_option("--epochs", cfg.epochs, "training epochs")->capture_default_str();
        cmd->add_option("--dropout", cfg.dropout, "dropout rate")->capture_default_str();
        cmd->add_option("--beta", cfg.beta, "loss weight beta")->capture_default_str();
        cmd->add_option("--mu", cfg.mu, "target cluster size")->capture_default_str();
        cmd->add_option("--alpha", cfg.alpha, "pooling scale, all layers")->capture_default_str();
        cmd->add_option("--alphas", alphas, "per-layer pooling scales, comma separated");
        cmd->add_option("--gcn-layers", cfg.gcn_layers, "GCN depth")->capture_default_str();
        cmd->add_option("--attention-mode", attention_mode, "literal|gated|no_global")->capture_default_str();
        cmd->add_option("--pooling", pooling, "attention|linear")->capture_default_str();
        cmd->add_option("--data-mode", data_mode, "both|poi_only|mobility_only")->capture_default_str();
        cmd->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    }

    cgap::TrainingConfig resolve() const {
        cgap::TrainingConfig c = cfg;
        c.attention_mode = cgap::attention_mode_from_string(attention_mode);
        c.pooling = cgap::pool_mode_from_string(pooling);
        c.data_mode = cgap::data_mode_from_string(data_mode);
        if (!alphas.empty()) {
            c.alphas.clear();
            std::stringstream ss(alphas);
            std::string item;
            while (std::getline(ss, item, ',')) c.alphas.push_back(std::stod(item));
        }
        cgap::validate_config(c);
        return c;
    }
};

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

void write_training_log(const fs::path& path, const std::vector<cgap::LossBreakdown>& log) {
    std::ofstream out(path);
    if (!out) throw cgap::validation_error("cannot write training log: " + path.string());
    out << "epoch,l_r,l_mob,l_poi,l_total\n";
    for (size_t i = 0; i < log.size(); ++i)
        out << i << "," << cgap::format_double(log[i].l_r) << "," << cgap::format_double(log[i].l_mob)
            << "," << cgap::format_double(log[i].l_poi) << "," << cgap::format_double(log[i].l_total)
            << "\n";
}

void write_embeddings_csv(const fs::path& path, const cgap::Tensor2& e) {
    std::ofstream out(path);
    if (!out) throw cgap::validation_error("cannot write embeddings: " + path.string());
    out << "region_id";
    for (int j = 0; j < e.cols; ++j) out << ",e_" << j;
    out << "\n";
    for (int i = 0; i < e.rows; ++i) {
        out << i;
        for (int j = 0; j < e.cols; ++j) out << "," << cgap::format_double(e(i, j));
        out << "\n";
    }
}

cgap::Tensor2 read_embeddings_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw cgap::validation_error("cannot read embeddings: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw cgap::validation_error(path.string() + ": empty file");
    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields = cgap::detail::split_csv_line(line);
        if (fields.size() < 2)
            throw cgap::validation_error(path.string() + ":" + std::to_string(line_no) + ": too few fields");
        std::vector<double> row;
        for (size_t f = 1; f < fields.size(); ++f)
            row.push_back(cgap::detail::parse_double(fields[f], path.string(), line_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw cgap::validation_error(path.string() + ": no embeddings");
    cgap::Tensor2 e(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw cgap::validation_error(path.string() + ": ragged rows");
        for (size_t j = 0; j < rows[i].size(); ++j) e(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
    return e;
}

json report_to_json(const cgap::RegressionReport& r, const std::string& task) {
    json folds = json::array();
    for (const auto& f : r.per_fold) folds.push_back({{"mae", f.mae}, {"rmse", f.rmse}, {"r2", f.r2}});
    return {{"task", task}, {"mae", r.mae}, {"rmse", r.rmse}, {"r2", r.r2}, {"folds", folds}};
}

fs::path prepare_out(const std::string& out) {
    fs::path p = out;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

fs::path manifest_dir(const fs::path& out_path) {
    return out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CGAP urban region representation pipeline"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate a synthetic city dataset");
    int gen_regions = 64, gen_communities = 4;
    uint64_t gen_seed = 0;
    std::string gen_out;
    gen->set_config("--config");
    gen->add_option("--regions", gen_regions, "number of regions")->capture_default_str();
    gen->add_option("--communities", gen_communities, "number of planted communities")->capture_default_str();
    gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
    gen->add_option("--out", gen_out, "output directory")->required();

    // train
    auto* tr = app.add_subcommand("train", "train the model on a dataset");
    TrainFlags tr_flags;
    std::string tr_data, tr_out, tr_log;
    tr->set_config("--config");
    tr->add_option("--data", tr_data, "dataset directory")->required();
    tr->add_option("--out", tr_out, "checkpoint path")->required();
    tr->add_option("--log", tr_log, "training log CSV (default: train_log.csv next to --out)");
    tr_flags.add_to(tr);

    // embed
    auto* em = app.add_subcommand("embed", "export region embeddings from a checkpoint");
    std::string em_ckpt, em_data, em_out;
    em->add_option("--ckpt", em_ckpt, "checkpoint path")->required();
    em->add_option("--data", em_data, "dataset directory")->required();
    em->add_option("--out", em_out, "embeddings CSV path")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate frozen embeddings on a downstream task");
    std::string ev_data, ev_embeddings, ev_task = "crime", ev_out;
    double ev_lambda = 0.01;
    int ev_folds = 5;
    uint64_t ev_seed = 0;
    ev->set_config("--config");
    ev->add_option("--data", ev_data, "dataset directory")->required();
    ev->add_option("--embeddings", ev_embeddings, "embeddings CSV from `embed`")->required();
    ev->add_option("--task", ev_task, "crime|checkin|landuse")->capture_default_str();
    ev->add_option("--out", ev_out, "metrics JSON path")->required();
    ev->add_option("--lambda", ev_lambda, "lasso penalty")->capture_default_str();
    ev->add_option("--folds", ev_folds, "cross-validation folds")->capture_default_str();
    ev->add_option("--seed", ev_seed, "fold-shuffle / k-means seed")->capture_default_str();

    // ablate
    auto* ab = app.add_subcommand("ablate", "run the ablation suite");
    TrainFlags ab_flags;
    std::string ab_data, ab_out;
    double ab_lambda = 0.01;
    int ab_folds = 5;
    ab->set_config("--config");
    ab->add_option("--data", ab_data, "dataset directory")->required();
    ab->add_option("--out", ab_out, "ablation CSV path")->required();
    ab->add_option("--lambda", ab_lambda, "lasso penalty")->capture_default_str();
    ab->add_option("--folds", ab_folds, "cross-validation folds")->capture_default_str();
    ab_flags.add_to(ab);

    // sweep-beta
    auto* sw = app.add_subcommand("sweep-beta", "train across beta values, report crime R^2");
    TrainFlags sw_flags;
    std::string sw_data, sw_out, sw_betas = "0.15,0.2,0.25,0.3,0.35,0.4,0.45";
    double sw_lambda = 0.01;
    int sw_folds = 5;
    sw->set_config("--config");
    sw->add_option("--data", sw_data, "dataset directory")->required();
    sw->add_option("--out", sw_out, "sweep CSV path")->required();
    sw->add_option("--betas", sw_betas, "comma-separated beta values")->capture_default_str();
    sw->add_option("--lambda", sw_lambda, "lasso penalty")->capture_default_str();
    sw->add_option("--folds", sw_folds, "cross-validation folds")->capture_default_str();
    sw_flags.add_to(sw);

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "compare tape gradients with central differences");
    TrainFlags gc_flags;
    gc_flags.cfg.d = 16;  // full-width default is prohibitively slow for a per-entry check
    std::string gc_data, gc_out = "gradcheck.json";
    gc->set_config("--config");
    gc->add_option("--data", gc_data, "dataset directory")->required();
    gc->add_option("--out", gc_out, "gradcheck report JSON path")->capture_default_str();
    gc_flags.add_to(gc);

    // report
    auto* rp = app.add_subcommand("report", "dump the pooling hierarchy of a checkpoint");
    std::string rp_ckpt, rp_data, rp_out;
    rp->add_option("--ckpt", rp_ckpt, "checkpoint path")->required();
    rp->add_option("--data", rp_data, "dataset directory")->required();
    rp->add_option("--out", rp_out, "hierarchy JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::endl;
        return 1;
    }

    cgap::WallClock clock;
    try {
        if (*gen) {
            auto [graph, labels] = cgap::generate_synthetic_city(gen_regions, gen_communities, gen_seed);
            cgap::save_city_dataset(gen_out, graph, labels);
            cgap::write_manifest(gen_out,
                                 {"generate",
                                  {{"regions", gen_regions}, {"communities", gen_communities}},
                                  cgap::dataset_hash(gen_out),
                                  gen_seed,
                                  {"regions.csv", "edges.csv", "mobility.csv", "poi.csv", "labels.csv"},
                                  clock.elapsed_ms()});
        } else if (*tr) {
            cgap::TrainingConfig cfg = tr_flags.resolve();
            auto [graph, labels] = cgap::load_city_dataset(tr_data);
            cgap::TrainResult result = cgap::train(graph, cfg);
            fs::path out_path = prepare_out(tr_out);
            fs::path log_path = tr_log.empty() ? manifest_dir(out_path) / "train_log.csv" : fs::path(tr_log);
            cgap::save_checkpoint(out_path, result.checkpoint);
            write_training_log(log_path, result.log);
            cgap::write_manifest(manifest_dir(out_path),
                                 {"train", cgap::config_to_json(cfg), cgap::dataset_hash(tr_data),
                                  cfg.seed,
                                  {out_path.string(), log_path.string()},
                                  clock.elapsed_ms()});
        } else if (*em) {
            cgap::Checkpoint ckpt = cgap::load_checkpoint(em_ckpt);
            auto [graph, labels] = cgap::load_city_dataset(em_data);
            cgap::Tensor2 e = cgap::embed(ckpt, graph);
            fs::path out_path = prepare_out(em_out);
            write_embeddings_csv(out_path, e);
            cgap::write_manifest(manifest_dir(out_path),
                                 {"embed", cgap::config_to_json(ckpt.config), cgap::dataset_hash(em_data),
                                  ckpt.config.seed,
                                  {out_path.string()},
                                  clock.elapsed_ms()});
        } else if (*ev) {
            auto [graph, labels] = cgap::load_city_dataset(ev_data);
            cgap::Tensor2 e = read_embeddings_csv(ev_embeddings);
            if (e.rows != graph.n_regions)
                throw cgap::validation_error("embeddings rows != region count");
            json metrics;
            if (ev_task == "crime" || ev_task == "checkin") {
                const std::vector<double>& y = ev_task == "crime" ? labels.crime : labels.checkin;
                metrics = report_to_json(cgap::evaluate_regression_task(e, y, ev_lambda, ev_folds, ev_seed),
                                         ev_task);
            } else if (ev_task == "landuse") {
                cgap::ClusteringReport r = cgap::evaluate_landuse(e, labels.landuse, ev_seed);
                metrics = {{"task", "landuse"}, {"nmi", r.nmi}, {"ari", r.ari}};
            } else {
                throw cgap::validation_error("unknown task '" + ev_task + "' (crime|checkin|landuse)");
            }
            fs::path out_path = prepare_out(ev_out);
            std::ofstream(out_path) << metrics.dump(2) << "\n";
            cgap::write_manifest(manifest_dir(out_path),
                                 {"eval",
                                  {{"task", ev_task}, {"lambda", ev_lambda}, {"folds", ev_folds}},
                                  cgap::dataset_hash(ev_data),
                                  ev_seed,
                                  {out_path.string()},
                                  clock.elapsed_ms()});
        } else if (*ab) {
            cgap::TrainingConfig cfg = ab_flags.resolve();
            auto [graph, labels] = cgap::load_city_dataset(ab_data);
            auto rows = cgap::run_ablation_suite(graph, labels, cfg, ab_lambda, ab_folds);
            fs::path out_path = prepare_out(ab_out);
            std::ofstream out(out_path);
            out << "variant,l_r,l_mob,l_poi,l_total,crime_mae,crime_rmse,crime_r2,"
                   "checkin_mae,checkin_rmse,checkin_r2\n";
            for (const auto& row : rows)
                out << row.variant << "," << cgap::format_double(row.final_loss.l_r) << ","
                    << cgap::format_double(row.final_loss.l_mob) << ","
                    << cgap::format_double(row.final_loss.l_poi) << ","
                    << cgap::format_double(row.final_loss.l_total) << ","
                    << cgap::format_double(row.crime.mae) << "," << cgap::format_double(row.crime.rmse)
                    << "," << cgap::format_double(row.crime.r2) << ","
                    << cgap::format_double(row.checkin.mae) << ","
                    << cgap::format_double(row.checkin.rmse) << ","
                    << cgap::format_double(row.checkin.r2) << "\n";
            out.close();
            cgap::write_manifest(manifest_dir(out_path),
                                 {"ablate", cgap::config_to_json(cfg), cgap::dataset_hash(ab_data),
                                  cfg.seed,
                                  {out_path.string()},
                                  clock.elapsed_ms()});
        } else if (*sw) {
            cgap::TrainingConfig cfg = sw_flags.resolve();
            auto [graph, labels] = cgap::load_city_dataset(sw_data);
            auto rows = cgap::beta_sweep(graph, labels, cfg, parse_double_list(sw_betas), sw_lambda, sw_folds);
            fs::path out_path = prepare_out(sw_out);
            std::ofstream out(out_path);
            out << "beta,r2\n";
            for (const auto& row : rows)
                out << cgap::format_double(row.beta) << "," << cgap::format_double(row.crime_r2) << "\n";
            out.close();
            cgap::write_manifest(manifest_dir(out_path),
                                 {"sweep-beta", cgap::config_to_json(cfg), cgap::dataset_hash(sw_data),
                                  cfg.seed,
                                  {out_path.string()},
                                  clock.elapsed_ms()});
        } else if (*gc) {
            cgap::TrainingConfig cfg = gc_flags.resolve();
            auto [graph, labels] = cgap::load_city_dataset(gc_data);
            cgap::FdCheckReport r = cgap::model_gradient_check(graph, cfg);
            bool passed = r.max_rel_err < 1e-4;
            std::cout << "max relative error: " << cgap::format_double(r.max_rel_err) << " (worst "
                      << r.worst_param << "[" << r.worst_row << "," << r.worst_col << "])" << std::endl;
            fs::path out_path = prepare_out(gc_out);
            std::ofstream(out_path) << json{{"max_rel_err", r.max_rel_err},
                                            {"worst_param", r.worst_param},
                                            {"passed", passed}}
                                           .dump(2)
                                    << "\n";
            cgap::write_manifest(manifest_dir(out_path),
                                 {"gradcheck", cgap::config_to_json(cfg), cgap::dataset_hash(gc_data),
                                  cfg.seed,
                                  {out_path.string()},
                                  clock.elapsed_ms()});
            return passed ? 0 : 2;
        } else if (*rp) {
            cgap::Checkpoint ckpt = cgap::load_checkpoint(rp_ckpt);
            auto [graph, labels] = cgap::load_city_dataset(rp_data);
            cgap::EmbedDetails details = cgap::embed_with_details(ckpt, graph);
            json layers = json::array();
            json sizes = json::array();
            sizes.push_back(graph.n_regions);
            for (const auto& layer : details.hierarchy.layers) {
                layers.push_back({{"n_nodes", layer.partition.membership.size()},
                                  {"n_clusters", layer.partition.n_clusters},
                                  {"membership", layer.partition.membership}});
                sizes.push_back(layer.partition.n_clusters);
            }
            json h_g = json::array();
            for (double v : details.hierarchy.global_feature.data) h_g.push_back(v);
            json out_json = {{"sizes", sizes}, {"layers", layers}, {"h_g", h_g}};
            fs::path out_path = prepare_out(rp_out);
            std::ofstream(out_path) << out_json.dump(2) << "\n";
            cgap::write_manifest(manifest_dir(out_path),
                                 {"report", cgap::config_to_json(ckpt.config), cgap::dataset_hash(rp_data),
                                  ckpt.config.seed,
                                  {out_path.string()},
                                  clock.elapsed_ms()});
        }
    } catch (const cgap::validation_error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return 0;
}

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "footprint/classifiers.hpp"
#include "footprint/corpus.hpp"
#include "footprint/errors.hpp"
#include "footprint/evaluation.hpp"
#include "footprint/features.hpp"
#include "footprint/labeling.hpp"
#include "footprint/pipeline.hpp"
#include "footprint/propagation.hpp"
#include "footprint/synthgen.hpp"

namespace {

using namespace footprint;

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

struct DatasetArgs {
    std::string input;
    std::string schema = "auto";
    std::string language;
    std::string start;
    std::string end;
    std::size_t buffer_cap = 200000;
    std::string spool_dir;
    bool track_active_days = false;
};

void add_dataset_options(CLI::App* sub, DatasetArgs& a) {
    sub->add_option("-i,--input", a.input, "archive path")->required();
    sub->add_option("--schema", a.schema, "alliance-tsv | linvill-csv | jsonl | auto");
    sub->add_option("--language", a.language, "keep only this language tag");
    sub->add_option("--start", a.start, "drop tweets before this time");
    sub->add_option("--end", a.end, "drop tweets at or after this time");
    sub->add_option("--buffer-cap", a.buffer_cap, "tweets kept in memory before spooling");
    sub->add_option("--spool-dir", a.spool_dir, "directory for the spill file");
    sub->add_flag("--track-active-days", a.track_active_days,
                  "track distinct active days per account");
}

DatasetSpec spec_from_args(const DatasetArgs& a) {
    DatasetSpec spec;
    spec.path = a.input;
    spec.schema = a.schema;
    spec.language_filter = a.language;
    if (!a.start.empty() || !a.end.empty()) {
        if (a.start.empty() || a.end.empty())
            throw InvalidConfig("--start and --end must be given together");
        auto lo = parse_time(a.start);
        auto hi = parse_time(a.end);
        if (!lo || !hi) throw InvalidConfig("unparseable --start/--end");
        spec.timeframe = {*lo, *hi};
    }
    spec.buffer_cap = a.buffer_cap;
    spec.spool_dir = a.spool_dir;
    spec.track_active_days = a.track_active_days;
    return spec;
}

IngestOptions options_from_args(const DatasetArgs& a) {
    DatasetSpec spec = spec_from_args(a);
    IngestOptions opt;
    opt.language_filter = spec.language_filter;
    opt.timeframe = spec.timeframe;
    opt.buffer_cap = spec.buffer_cap;
    opt.spool_dir = spec.spool_dir;
    opt.track_active_days = spec.track_active_days;
    return opt;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UnreadableFile("cannot write " + path);
    out << content;
}

std::filesystem::path ensure_out(const GlobalArgs& globals, const char* fallback) {
    std::filesystem::path dir(globals.out_dir.empty() ? fallback : globals.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

PipelineConfig config_from_globals(const GlobalArgs& globals) {
    PipelineConfig cfg;
    if (!globals.config_path.empty()) cfg = PipelineConfig::load(globals.config_path);
    if (globals.seed_set) cfg.seed = globals.seed;
    if (!globals.out_dir.empty()) cfg.out_dir = globals.out_dir;
    return cfg;
}

std::map<std::string, Category> category_csv(const std::string& path) {
    std::map<std::string, Category> out;
    for (const auto& [id, label] : load_seed_labels(path).entries())
        out.emplace(id, label.category);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"social-footprint account classification pipeline"};
    app.require_subcommand(1);

    GlobalArgs globals;
    app.add_option("--config", globals.config_path, "pipeline config JSON")
        ->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", globals.seed, "override the config seed");
    app.add_option("--out", globals.out_dir, "override the output directory");
    app.add_option("--threads", globals.threads, "cap worker threads (0 = library default)");

    // run
    auto* sub_run = app.add_subcommand("run", "run every stage from a config file")->fallthrough();

    // synth
    auto* sub_synth = app.add_subcommand("synth", "generate a synthetic archive")->fallthrough();
    int synth_accounts = 100;
    double synth_hashed = 0.25, synth_noise = 0.1;
    bool synth_no_verify = false;
    sub_synth->add_option("--accounts", synth_accounts, "accounts per category");
    sub_synth->add_option("--hashed-fraction", synth_hashed, "hashed share per category");
    sub_synth->add_option("--noise", synth_noise, "cross-pool hashtag probability");
    sub_synth->add_flag("--no-verify", synth_no_verify, "skip the statistical self-check");

    // ingest
    auto* sub_ingest = app.add_subcommand("ingest", "parse an archive and report a summary")->fallthrough();
    DatasetArgs ingest_args;
    add_dataset_options(sub_ingest, ingest_args);

    // label
    auto* sub_label = app.add_subcommand("label", "seed-label accounts")->fallthrough();
    DatasetArgs label_data;
    add_dataset_options(sub_label, label_data);
    std::string label_labels, label_rules, label_footprint;
    int label_min_hits = 2;
    bool label_no_rules = false, label_no_footprint = false;
    sub_label->add_option("--labels", label_labels, "operator-coded labels CSV");
    sub_label->add_option("--rules", label_rules, "description rule file");
    sub_label->add_option("--footprint", label_footprint, "hashtag footprint CSV");
    sub_label->add_option("--min-hits", label_min_hits, "footprint hit threshold");
    sub_label->add_flag("--no-rules", label_no_rules, "skip description rules");
    sub_label->add_flag("--no-footprint", label_no_footprint, "skip hashtag footprints");

    // propagate
    auto* sub_prop = app.add_subcommand("propagate", "hashtag-similarity label propagation")->fallthrough();
    DatasetArgs prop_data;
    add_dataset_options(sub_prop, prop_data);
    std::string prop_labels;
    int prop_months = 6, prop_rounds = 10;
    double prop_floor = 0.05;
    bool prop_binary = false, prop_fixpoint = false;
    sub_prop->add_option("--labels", prop_labels, "seed labels CSV")->required();
    sub_prop->add_option("--months", prop_months, "subspan width in months");
    sub_prop->add_flag("--binary", prop_binary, "binary vectors instead of counts");
    sub_prop->add_flag("--fixpoint", prop_fixpoint, "iterate until no new assignments");
    sub_prop->add_option("--max-rounds", prop_rounds, "fixpoint round cap");
    sub_prop->add_option("--floor", prop_floor, "low-confidence score floor");

    // featurize
    auto* sub_feat = app.add_subcommand("featurize", "behavioral feature matrix")->fallthrough();
    DatasetArgs feat_data;
    add_dataset_options(sub_feat, feat_data);
    std::string feat_labels;
    std::vector<std::string> feat_names;
    int feat_target = 8;
    bool feat_column = false;
    sub_feat->add_option("--labels", feat_labels, "final labels CSV (adds a category column)");
    sub_feat->add_option("--features", feat_names, "candidate feature names");
    sub_feat->add_option("--target-count", feat_target, "features to keep after screening");
    sub_feat->add_flag("--column-normalize", feat_column, "L1 per column instead of per row");

    // train
    auto* sub_train = app.add_subcommand("train", "cross-validate and train the forest")->fallthrough();
    std::string train_features;
    int train_trees = 100, train_min_split = 2, train_fps = 0, train_k = 5;
    int train_max_depth = -1;
    bool train_no_bootstrap = false, train_weighted = false;
    sub_train->add_option("--features", train_features, "features.csv with a category column")
        ->required();
    sub_train->add_option("--trees", train_trees, "trees in the forest");
    sub_train->add_option("--max-depth", train_max_depth, "depth cap (-1 = unbounded)");
    sub_train->add_option("--min-split", train_min_split, "minimum samples to split");
    sub_train->add_option("--features-per-split", train_fps, "candidates per split (0 = sqrt)");
    sub_train->add_flag("--no-bootstrap", train_no_bootstrap, "train each tree on all rows");
    sub_train->add_flag("--weighted", train_weighted, "inverse-frequency class weights");
    sub_train->add_option("-k,--folds", train_k, "cross-validation folds");

    // evaluate
    auto* sub_eval = app.add_subcommand("evaluate", "score a model against labeled features")->fallthrough();
    std::string eval_model, eval_features;
    sub_eval->add_option("--model", eval_model, "model JSON")->required();
    sub_eval->add_option("--features", eval_features, "features.csv with a category column")
        ->required();

    // validate
    auto* sub_val = app.add_subcommand("validate", "cross-dataset agreement / manual recheck")->fallthrough();
    std::string val_model, val_reference, val_ref_schema = "linvill-csv";
    std::vector<std::string> val_mapping;
    std::string val_denominator = "reference-size";
    std::string val_recheck, val_predictions, val_name = "reference";
    bool val_column = false;
    sub_val->add_option("--model", val_model, "model JSON");
    sub_val->add_option("--reference", val_reference, "independently labeled archive");
    sub_val->add_option("--reference-schema", val_ref_schema, "reference archive schema");
    sub_val->add_option("--name", val_name, "reference label for reports");
    sub_val->add_option("--mapping", val_mapping, "Category=token pairs");
    sub_val->add_option("--denominator", val_denominator,
                        "reference-size | intersection-size");
    sub_val->add_option("--recheck", val_recheck, "post-hoc coded labels CSV");
    sub_val->add_option("--predictions", val_predictions, "predictions CSV to recheck");
    sub_val->add_flag("--column-normalize", val_column, "L1 per column instead of per row");

    // compare
    auto* sub_compare = app.add_subcommand("compare", "rank classifiers under one CV protocol")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    globals.seed_set = seed_opt->count() > 0;
#ifdef _OPENMP
    if (globals.threads > 0) omp_set_num_threads(globals.threads);
#endif

    try {
        if (sub_run->parsed()) {
            if (globals.config_path.empty()) throw InvalidConfig("run requires --config");
            PipelineConfig cfg = config_from_globals(globals);
            RunReport report = run_pipeline(cfg);
            std::cout << report.to_markdown();
            std::cout << "\nartifacts: " << cfg.out_dir << "\n";
        } else if (sub_synth->parsed()) {
            GeneratorConfig cfg = GeneratorConfig::defaults();
            if (globals.seed_set) cfg.seed = globals.seed;
            cfg.accounts_per_category.fill(synth_accounts);
            cfg.hashed_fraction.fill(synth_hashed);
            cfg.noise = synth_noise;
            auto dir = ensure_out(globals, "synth-out");
            GenerationResult result = generate(cfg, dir.string());
            std::cout << "accounts " << result.account_count << " (hashed "
                      << result.hashed_count << "), tweets " << result.tweet_count << "\n"
                      << "archive: " << result.archive_path << "\n"
                      << "labels:  " << result.labels_path << "\n"
                      << "truth:   " << result.truth_path << "\n";
            if (!synth_no_verify) {
                ParseResult parsed = parse_archive(result.archive_path, "jsonl");
                VerificationReport check = verify_generation(parsed.dataset, cfg, result.truth);
                write_file((dir / "verification.json").string(), check.to_json());
                if (!check.ok) {
                    std::string detail;
                    for (const std::string& flag : check.flags) detail += "\n  " + flag;
                    throw StageError("synthetic archive failed verification:" + detail);
                }
                std::cout << "verification: ok\n";
            }
        } else if (sub_ingest->parsed()) {
            ParseResult parsed =
                parse_archive(ingest_args.input, ingest_args.schema, options_from_args(ingest_args));
            std::cout << parsed.summary.to_json() << "\n";
            if (!globals.out_dir.empty()) {
                auto dir = ensure_out(globals, ".");
                write_file((dir / "ingest_summary.json").string(), parsed.summary.to_json());
            }
        } else if (sub_label->parsed()) {
            ParseResult parsed =
                parse_archive(label_data.input, label_data.schema, options_from_args(label_data));
            PipelineConfig cfg;
            cfg.labels_path = label_labels;
            cfg.rules_path = label_rules;
            cfg.footprint_path = label_footprint;
            cfg.footprint_min_hits = label_min_hits;
            cfg.use_description_rules = !label_no_rules;
            cfg.use_footprint_table = !label_no_footprint;
            SeedLabelSet seeds = build_seed_labels(parsed.dataset, cfg);
            auto dir = ensure_out(globals, "footprint-run");
            save_seed_labels(seeds, (dir / "labels_seed.csv").string());
            LabelCensus census = census_of(seeds, parsed.dataset.accounts.size());
            std::cout << "labeled " << census.labeled << " of "
                      << parsed.dataset.accounts.size() << " accounts ("
                      << census.uncategorized << " uncategorized)\n";
        } else if (sub_prop->parsed()) {
            ParseResult parsed =
                parse_archive(prop_data.input, prop_data.schema, options_from_args(prop_data));
            SeedLabelSet seeds = load_seed_labels(prop_labels);
            PropagationConfig cfg;
            cfg.subspan_months = prop_months;
            cfg.vector_mode = prop_binary ? VectorMode::Binary : VectorMode::Counts;
            cfg.fixpoint = prop_fixpoint;
            cfg.max_rounds = prop_rounds;
            cfg.low_confidence_floor = prop_floor;
            PropagationReport report = propagate(parsed.dataset, seeds, cfg);
            SeedLabelSet final_labels = seeds;
            for (const auto& [id, outcome] : report.assigned)
                final_labels.set(id, outcome.category, Provenance::Propagated);
            auto dir = ensure_out(globals, "footprint-run");
            write_file((dir / "propagation.json").string(), report.to_json());
            save_seed_labels(final_labels, (dir / "labels_final.csv").string());
            std::cout << "assigned " << report.assigned.size() << " accounts over "
                      << report.subspan_count << " subspans; "
                      << report.still_uncategorized.size() << " still uncategorized\n";
        } else if (sub_feat->parsed()) {
            ParseResult parsed =
                parse_archive(feat_data.input, feat_data.schema, options_from_args(feat_data));
            PipelineConfig cfg;
            cfg.dataset = spec_from_args(feat_data);
            cfg.features = feat_names;
            cfg.target_feature_count = feat_target;
            cfg.normalize = feat_column ? NormalizeAxis::Column : NormalizeAxis::Row;
            FeatureStageResult built = build_features(parsed.dataset, cfg);
            auto dir = ensure_out(globals, "footprint-run");
            write_file((dir / "correlation.json").string(), built.correlation.to_json());
            if (!feat_labels.empty()) {
                std::map<std::string, Category> labels = category_csv(feat_labels);
                write_file((dir / "features.csv").string(),
                           feature_matrix_csv(built.rows, built.selected, &labels));
            } else {
                write_file((dir / "features.csv").string(),
                           feature_matrix_csv(built.rows, built.selected));
            }
            std::cout << built.rows.size() << " rows x " << built.selected.size()
                      << " features";
            for (const auto& [name, reason] : built.dropped)
                std::cout << "\n  dropped " << name << ": " << reason;
            std::cout << "\n";
        } else if (sub_train->parsed()) {
            FeatureTable table = load_feature_matrix(train_features);
            std::vector<LabeledSample> samples = samples_from_table(table);
            TrainConfig cfg;
            cfg.n_trees = train_trees;
            if (train_max_depth >= 0) cfg.max_depth = train_max_depth;
            cfg.min_samples_split = train_min_split;
            cfg.features_per_split = train_fps;
            cfg.bootstrap = !train_no_bootstrap;
            cfg.class_weighting =
                train_weighted ? ClassWeighting::InverseFrequency : ClassWeighting::None;
            cfg.seed = globals.seed_set ? globals.seed : 1;
            auto dir = ensure_out(globals, "footprint-run");
            CrossValidationReport cv = cross_validate(samples, cfg, train_k, cfg.seed);
            write_file((dir / "metrics.json").string(), cv.to_json());
            write_file((dir / "metrics.md").string(), cv.pooled.to_markdown());
            ForestModel model = train_forest(samples, cfg);
            model.feature_names = table.names;
            write_file((dir / "model.json").string(), model.to_json());
            std::cout << "cv mean accuracy " << cv.mean_accuracy << " over " << cv.k
                      << " folds; model written to " << (dir / "model.json").string() << "\n";
        } else if (sub_eval->parsed()) {
            std::ifstream in(eval_model, std::ios::binary);
            if (!in) throw UnreadableFile("cannot open model: " + eval_model);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            ForestModel model = ForestModel::from_json(text);
            FeatureTable table = load_feature_matrix(eval_features);
            std::map<std::string, Category> predicted;
            for (const Prediction& p : predict_all(model, table.rows))
                if (table.labels.count(p.account_id)) predicted.emplace(p.account_id, p.category);
            MetricsReport metrics = evaluate(table.labels, predicted);
            std::cout << metrics.to_markdown();
            if (!globals.out_dir.empty()) {
                auto dir = ensure_out(globals, ".");
                write_file((dir / "evaluation.json").string(), metrics.to_json());
            }
        } else if (sub_val->parsed()) {
            if (val_reference.empty() && val_recheck.empty())
                throw InvalidConfig("validate needs --reference and/or --recheck");
            auto dir = ensure_out(globals, "footprint-run");
            nlohmann::json artifact = nlohmann::json::object();
            if (!val_reference.empty()) {
                if (val_model.empty()) throw InvalidConfig("--reference requires --model");
                std::ifstream in(val_model, std::ios::binary);
                if (!in) throw UnreadableFile("cannot open model: " + val_model);
                std::string text((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
                ForestModel model = ForestModel::from_json(text);
                ParseResult parsed = parse_archive(val_reference, val_ref_schema);
                std::map<std::string, std::string> tokens =
                    extract_account_categories(val_reference, val_ref_schema);
                std::vector<FeatureVector> rows =
                    extract_all_features(parsed.dataset, catalog_for(model.feature_names));
                normalize_features(rows,
                                   val_column ? NormalizeAxis::Column : NormalizeAxis::Row);
                std::map<std::string, Category> predictions;
                for (const Prediction& p : predict_all(model, rows))
                    predictions.emplace(p.account_id, p.category);
                std::vector<std::pair<Category, std::string>> mapping;
                for (const std::string& pair : val_mapping) {
                    auto eq = pair.find('=');
                    if (eq == std::string::npos)
                        throw InvalidConfig("mapping must be Category=token: " + pair);
                    auto cat = category_from_string(pair.substr(0, eq));
                    if (!cat || *cat == Category::Uncategorized)
                        throw InvalidConfig("unknown category in mapping: " + pair);
                    mapping.emplace_back(*cat, pair.substr(eq + 1));
                }
                if (mapping.empty()) mapping.emplace_back(Category::FakeNews, "NewsFeed");
                AgreementDenominator den;
                if (val_denominator == "reference-size") {
                    den = AgreementDenominator::ReferenceCategorySize;
                } else if (val_denominator == "intersection-size") {
                    den = AgreementDenominator::IntersectionSize;
                } else {
                    throw InvalidConfig("unknown denominator: " + val_denominator);
                }
                AgreementReport agreement =
                    cross_dataset_agreement(predictions, tokens, mapping, den, val_name);
                artifact["agreement"] = nlohmann::json::parse(agreement.to_json());
                std::cout << "agreement " << agreement.agreement << " (" << agreement.matched
                          << " matched of " << agreement.reference_size << " reference)\n";
            }
            if (!val_recheck.empty()) {
                if (val_predictions.empty()) throw InvalidConfig("--recheck requires --predictions");
                RecheckReport recheck = manual_recheck_accuracy(category_csv(val_predictions),
                                                                category_csv(val_recheck));
                artifact["manual_recheck"] = nlohmann::json::parse(recheck.to_json());
                std::cout << "recheck accuracy " << recheck.accuracy << " over "
                          << recheck.covered << " accounts\n";
            }
            write_file((dir / "validation.json").string(), artifact.dump(2));
        } else if (sub_compare->parsed()) {
            if (globals.config_path.empty()) throw InvalidConfig("compare requires --config");
            PipelineConfig cfg = config_from_globals(globals);
            ComparisonTable table = compare_classifiers(cfg);
            std::filesystem::create_directories(cfg.out_dir);
            write_file((std::filesystem::path(cfg.out_dir) / "comparison.json").string(),
                       table.to_json());
            write_file((std::filesystem::path(cfg.out_dir) / "comparison.md").string(),
                       table.to_markdown());
            std::cout << table.to_markdown();
        }
        return 0;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const StageError& e) {
        std::cerr << "stage error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

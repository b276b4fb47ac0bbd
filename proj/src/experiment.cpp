#include "statemix/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>

#include "statemix/baselines.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace statemix {

DatasetFormat parse_dataset_format(const std::string& s) {
    if (s == "movielens") return DatasetFormat::MovieLens;
    if (s == "netflix") return DatasetFormat::Netflix;
    if (s == "csv") return DatasetFormat::Csv;
    throw DomainError("unknown dataset format '" + s + "'");
}

Blend parse_blend(const std::string& s) {
    if (s == "score") return Blend::Score;
    if (s == "rank") return Blend::Rank;
    throw DomainError("unknown blend '" + s + "'");
}

std::vector<double> parse_alpha_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double start = 0, step = 0, stop = 0;
        char c1 = 0, c2 = 0;
        std::istringstream in(text);
        if (!(in >> start >> c1 >> step >> c2 >> stop) || c1 != ':' || c2 != ':' || step <= 0)
            throw DomainError("bad alpha grid '" + text + "'");
        const auto steps = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long k = 0; k <= steps; ++k) {
            // snap to the step's decimal resolution so 0.05 * 3 prints as 0.15
            double a = start + static_cast<double>(k) * step;
            a = std::round(a * 1e9) / 1e9;
            out.push_back(a);
        }
    } else {
        std::istringstream in(text);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            if (tok.empty()) continue;
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw DomainError("bad alpha value '" + tok + "'");
            }
        }
    }
    if (out.empty()) throw DomainError("empty alpha grid");
    for (double a : out)
        if (!(a >= 0.0 && a <= 1.0)) throw DomainError("alpha values must lie in [0,1]");
    return out;
}

std::string format_alpha(double alpha) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", alpha);
    return buf;
}

void ExperimentConfig::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw DomainError("train fraction must lie in (0,1)");
    if (list_size < 1) throw DomainError("list size must be at least 1");
    for (double a : alphas)
        if (!(a >= 0.0 && a <= 1.0)) throw DomainError("alpha values must lie in [0,1]");
    if (markov_order < 1) throw DomainError("markov order must be at least 1");
    if (threads < 1) throw DomainError("thread count must be at least 1");
    static const std::vector<std::string> known = {"pm",     "sm",     "hybrid",     "usercf",
                                                   "itemcf", "markov", "popularity", "random"};
    for (const auto& m : models)
        if (std::find(known.begin(), known.end(), m) == known.end())
            throw DomainError("unknown model '" + m + "'");
}

InteractionLog load_dataset(const std::string& path, DatasetFormat format) {
    if (!std::filesystem::exists(path)) throw ParseError("dataset not found: " + path);
    switch (format) {
        case DatasetFormat::MovieLens: return load_movielens(path);
        case DatasetFormat::Netflix: return load_netflix(path).log;
        case DatasetFormat::Csv: {
            std::ifstream in(path);
            if (!in) throw ParseError("cannot open " + path);
            return read_log_csv(in);
        }
    }
    throw DomainError("unknown dataset format");
}

// ---------------------------------------------------------------------------

Evaluation::Evaluation(const InteractionLog& log, double train_fraction, std::size_t list_size,
                       double threshold)
    : split_(chronological_split(log, train_fraction)),
      train_(split_.train, threshold),
      list_size_(list_size) {
    if (list_size < 1) throw DomainError("list size must be at least 1");
    split_.test_users = select_test_users(split_, list_size);
    const auto& test_events = split_.test.events();
    for (UserId user : split_.test_users) {
        const UserProfile* profile = train_.profile(user);
        std::map<ItemIndex, int> latest;
        for (auto idx : split_.test.user_events().at(user)) {
            const auto& e = test_events[idx];
            auto item = train_.items().find(e.item);
            if (!item || profile->rated(*item)) continue;
            latest[*item] = e.rating;
        }
        RelevantItems rel;
        for (const auto& [item, rating] : latest)
            if (binarize(rating, threshold) == Polarity::Like) rel.push_back(item);
        users_.push_back(user);
        relevant_.push_back(std::move(rel));
    }
}

MetricsReport summarize(const Evaluation& eval, std::span<const UserOutcome> outcomes,
                        const DiversityOptions& diversity) {
    MetricsReport r;
    r.n = eval.list_size();
    r.test_users = outcomes.size();
    std::vector<std::vector<ItemIndex>> lists;
    lists.reserve(outcomes.size());
    double rec_sum = 0.0;
    std::size_t rec_users = 0;
    for (const auto& o : outcomes) {
        lists.push_back(o.top);
        if (o.recovery) {
            rec_sum += *o.recovery;
            ++rec_users;
        }
    }
    if (rec_users > 0) r.recovery = rec_sum / static_cast<double>(rec_users);
    r.precision = precision_at_n(lists, eval.relevant(), r.n);
    r.coverage_bits = coverage_entropy(lists);
    if (auto d = interlist_diversity(lists, r.n, diversity)) r.diversity = d->value;
    r.novelty_bits = self_info_novelty(lists, eval.train().popularity(), outcomes.size());
    return r;
}

namespace {

UserOutcome outcome_of(std::span<const ItemIndex> ranking, const RelevantItems& relevant,
                       std::size_t n) {
    UserOutcome o;
    const std::size_t take = std::min(n, ranking.size());
    o.top.assign(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(take));
    o.recovery = user_recovery(ranking, relevant);
    return o;
}

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                 since)
        .count();
}

/// Runs body(u) for every user index, rethrowing the first exception.
template <typename Body>
void for_each_user(std::size_t count, int threads, Body&& body) {
    std::exception_ptr failure;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4) num_threads(std::max(1, threads))
#else
    (void)threads;
#endif
    for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(count); ++u) {
        try {
            body(static_cast<std::size_t>(u));
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

ModelRun evaluate_ranker(const Evaluation& eval, const Ranker& ranker, int threads) {
    const auto start = std::chrono::steady_clock::now();
    const auto& users = eval.users();
    ModelRun run;
    run.outcomes.resize(users.size());
    for_each_user(users.size(), threads, [&](std::size_t u) {
        const auto ranking = ranker(users[u]);
        run.outcomes[u] = outcome_of(ranking, eval.relevant()[u], eval.list_size());
    });
    run.report = summarize(eval, run.outcomes);
    run.report.runtime_ms = elapsed_ms(start);
    return run;
}

std::vector<ModelRun> evaluate_hybrid_sweep(const Evaluation& eval, const StateGraph& graph,
                                            std::span<const double> alphas, Blend blend,
                                            int threads) {
    const auto start = std::chrono::steady_clock::now();
    const auto& users = eval.users();
    std::vector<ModelRun> runs(alphas.size());
    for (auto& r : runs) r.outcomes.resize(users.size());
    for_each_user(users.size(), threads, [&](std::size_t u) {
        const auto& train = eval.train();
        const auto state = user_state(train, users[u]);
        const auto candidates = train.candidates(users[u]);
        const auto pm = pm_scores(graph, state, candidates);
        const auto sm = sm_scores(graph, state, candidates);
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            const auto blended = blend == Blend::Score ? hybrid_scores(pm, sm, alphas[a])
                                                       : hybrid_ranks(pm, sm, alphas[a]);
            const auto ranking = rank_order(blended);
            runs[a].outcomes[u] = outcome_of(ranking, eval.relevant()[u], eval.list_size());
        }
    });
    const auto ms = elapsed_ms(start);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        runs[a].report = summarize(eval, runs[a].outcomes);
        runs[a].report.alpha = alphas[a];
        runs[a].report.runtime_ms = ms;
    }
    return runs;
}

std::vector<ItemIndex> random_ranking(const TrainingIndex& train, UserId user, std::uint64_t seed) {
    auto items = train.candidates(user);
    std::seed_seq seq{seed, static_cast<std::uint64_t>(user)};
    std::mt19937_64 rng(seq);
    std::shuffle(items.begin(), items.end(), rng);
    return items;
}

// ---------------------------------------------------------------------------

std::size_t DegreeHistogram::total() const {
    std::size_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

double DegreeHistogram::mean_bin_index() const {
    const auto t = total();
    if (t == 0) return 0.0;
    double s = 0.0;
    for (std::size_t b = 0; b < counts.size(); ++b) s += static_cast<double>(b * counts[b]);
    return s / static_cast<double>(t);
}

DegreeHistogram emit_degree_histogram(std::span<const std::vector<ItemIndex>> lists,
                                      const Eigen::VectorXi& train_item_counts) {
    auto bin_of = [](std::int64_t p) -> std::size_t {
        std::size_t b = 0;
        while (p > 0) {
            p >>= 1;
            ++b;
        }
        return b;
    };
    const std::int64_t max_pop = train_item_counts.size() > 0 ? train_item_counts.maxCoeff() : 0;
    const std::size_t bins = bin_of(max_pop) + 1;
    DegreeHistogram h;
    h.counts.assign(bins, 0);
    for (std::size_t b = 0; b < bins; ++b) {
        h.bin_low.push_back(b == 0 ? 0 : std::int64_t{1} << (b - 1));
        h.bin_high.push_back(std::int64_t{1} << b);
    }
    for (const auto& list : lists)
        for (auto item : list) ++h.counts[bin_of(train_item_counts(item))];
    return h;
}

void write_histogram_csv(const DegreeHistogram& h, std::ostream& out) {
    out << "bin_low,bin_high,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        out << h.bin_low[b] << ',' << h.bin_high[b] << ',' << h.counts[b] << '\n';
}

DatasetStats dataset_stats(const InteractionLog& log) {
    DatasetStats s;
    s.users = log.user_count();
    s.items = log.item_count();
    s.ratings = log.size();
    s.skipped_lines = log.skipped_lines();
    if (log.empty()) {
        s.degree_percentiles.assign(5, 0);
        return s;
    }
    auto [lo, hi] = std::minmax_element(log.events().begin(), log.events().end(),
                                        [](const RatingEvent& a, const RatingEvent& b) {
                                            return a.timestamp < b.timestamp;
                                        });
    s.first_timestamp = lo->timestamp;
    s.last_timestamp = hi->timestamp;

    std::vector<std::size_t> degrees;
    for (const auto& [item, c] : log.item_counts()) degrees.push_back(c);
    std::sort(degrees.begin(), degrees.end());
    for (double q : {0.50, 0.75, 0.90, 0.99, 1.0}) {
        auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(degrees.size()))) - 1;
        s.degree_percentiles.push_back(degrees[std::min(idx, degrees.size() - 1)]);
    }
    const auto top = static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(degrees.size())));
    std::size_t held = 0;
    for (std::size_t k = 0; k < top; ++k) held += degrees[degrees.size() - 1 - k];
    s.top20_share = static_cast<double>(held) / static_cast<double>(s.ratings);
    return s;
}

void write_stats(const DatasetStats& s, std::ostream& out) {
    out << "users " << s.users << '\n'
        << "items " << s.items << '\n'
        << "ratings " << s.ratings << '\n'
        << "skipped_lines " << s.skipped_lines << '\n'
        << "first_timestamp " << s.first_timestamp << '\n'
        << "last_timestamp " << s.last_timestamp << '\n'
        << "item_degree_p50 " << s.degree_percentiles[0] << '\n'
        << "item_degree_p75 " << s.degree_percentiles[1] << '\n'
        << "item_degree_p90 " << s.degree_percentiles[2] << '\n'
        << "item_degree_p99 " << s.degree_percentiles[3] << '\n'
        << "item_degree_max " << s.degree_percentiles[4] << '\n';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", s.top20_share);
    out << "top20_item_rating_share " << buf << '\n';
}

// ---------------------------------------------------------------------------

namespace {

void write_histogram(const std::filesystem::path& dir, const std::string& model, double alpha,
                     const ModelRun& run, const Eigen::VectorXi& popularity,
                     std::vector<std::string>& files) {
    std::vector<std::vector<ItemIndex>> lists;
    lists.reserve(run.outcomes.size());
    for (const auto& o : run.outcomes) lists.push_back(o.top);
    const auto hist = emit_degree_histogram(lists, popularity);
    const auto path = dir / ("hist_" + model + "_" + format_alpha(alpha) + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_histogram_csv(hist, out);
    files.push_back(path.string());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
    config.validate();
    namespace fs = std::filesystem;
    const auto data = load_dataset(config.dataset, config.format);
    ExperimentResult result;
    result.stats = dataset_stats(data);
    if (log)
        *log << "loaded " << data.size() << " ratings, " << data.user_count() << " users, "
             << data.item_count() << " items (" << data.skipped_lines() << " malformed lines skipped)\n";

    const Evaluation eval(data, config.train_fraction, config.list_size, config.threshold);
    if (eval.users().empty()) {
        std::ostringstream msg;
        msg << "no eligible test users: " << eval.split().train.size() << " train / "
            << eval.split().test.size() << " test ratings, " << eval.split().test.user_count()
            << " test-split users, none with a training rating and more than " << config.list_size
            << " test ratings";
        throw std::runtime_error(msg.str());
    }
    if (log) *log << eval.users().size() << " eligible test users\n";

    fs::create_directories(config.out_dir);
    const fs::path dir(config.out_dir);
    const auto& train = eval.train();
    const std::string graph_name = to_string(config.graph);
    const auto has = [&](const char* m) {
        return std::find(config.models.begin(), config.models.end(), m) != config.models.end();
    };

    std::unique_ptr<StateGraph> graph;
    if (has("pm") || has("sm") || has("hybrid")) {
        graph = std::make_unique<StateGraph>(config.graph == GraphKind::AT
                                                 ? build_at_graph(train)
                                                 : build_ac_graph(train, config.threads));
        if (log)
            *log << graph_name << " graph: " << graph->edge_count() << " edges, total weight "
                 << static_cast<long long>(graph->total_weight()) << '\n';
    }

    auto finish = [&](ModelRun& run, const std::string& model, const std::string& graph_col) {
        run.report.model = model;
        run.report.graph = graph_col;
        if (!config.record_timing) run.report.runtime_ms = 0;
        result.rows.push_back(run.report);
        if (log) *log << to_csv_row(run.report) << '\n';
    };

    for (const auto& model : config.models) {
        if (model == "pm" || model == "sm") {
            const bool forward = model == "pm";
            auto run = evaluate_ranker(
                eval,
                [&](UserId u) {
                    const auto state = user_state(train, u);
                    const auto candidates = train.candidates(u);
                    return rank_order(forward ? pm_scores(*graph, state, candidates)
                                              : sm_scores(*graph, state, candidates));
                },
                config.threads);
            finish(run, model, graph_name);
            write_histogram(dir, model, forward ? 0.0 : 1.0, run, train.popularity(),
                            result.histogram_files);
        } else if (model == "hybrid") {
            auto runs = evaluate_hybrid_sweep(eval, *graph, config.alphas, config.blend, config.threads);
            const std::string name = config.blend == Blend::Score ? "hybrid" : "hybrid-rank";
            for (std::size_t a = 0; a < runs.size(); ++a) {
                finish(runs[a], name, graph_name);
                write_histogram(dir, name, config.alphas[a], runs[a], train.popularity(),
                                result.histogram_files);
            }
        } else if (model == "usercf") {
            const UserCF cf(train, config.neighbors);
            auto run = evaluate_ranker(
                eval, [&](UserId u) { return rank_order(cf.scores(u)); }, config.threads);
            finish(run, model, "-");
        } else if (model == "itemcf") {
            const ItemCF cf(train, config.threads);
            auto run = evaluate_ranker(
                eval, [&](UserId u) { return rank_order(cf.scores(u)); }, config.threads);
            finish(run, model, "-");
        } else if (model == "popularity") {
            auto run = evaluate_ranker(
                eval, [&](UserId u) { return popularity_ranking(train, u); }, config.threads);
            finish(run, model, "-");
        } else if (model == "markov") {
            const ClassicMarkov chain(train, config.markov_order);
            auto run = evaluate_ranker(
                eval, [&](UserId u) { return chain.ranking(u); }, config.threads);
            finish(run, model, "-");
        } else if (model == "random") {
            auto run = evaluate_ranker(
                eval, [&](UserId u) { return random_ranking(train, u, config.seed); },
                config.threads);
            finish(run, model, "-");
        }
    }

    {
        std::ofstream out(dir / "metrics.csv");
        if (!out) throw std::runtime_error("cannot write metrics.csv in " + config.out_dir);
        out << "# coverage_bits: Shannon entropy (log2) of recommendation-slot shares; "
               "novelty_bits: log2(test_users / training raters)\n";
        out << kMetricsCsvHeader << '\n';
        for (const auto& row : result.rows) out << to_csv_row(row) << '\n';
    }
    {
        std::ofstream out(dir / "stats.txt");
        if (!out) throw std::runtime_error("cannot write stats.txt in " + config.out_dir);
        write_stats(result.stats, out);
        out << "train_ratings " << eval.split().train.size() << '\n'
            << "test_ratings " << eval.split().test.size() << '\n'
            << "eligible_test_users " << eval.users().size() << '\n';
    }
    return result;
}

}  // namespace statemix

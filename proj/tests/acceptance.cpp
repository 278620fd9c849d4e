// Acceptance run: one line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "forest_laws.hpp"
#include "helpers.hpp"
#include "ptk/cli.hpp"
#include "ptk/corpus.hpp"
#include "ptk/machine_file.hpp"
#include "ptk/minimize.hpp"
#include "ptk/pumpability.hpp"

using namespace ptk;
using ptk::testing::for_each_word;

namespace {

struct Report {
    bool ok = true;
    std::string detail;
    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
};

bool run_criterion(int id, const std::string& title, double limit_s, const std::function<std::string(Report&)>& body) {
    Report r;
    auto t0 = std::chrono::steady_clock::now();
    std::string summary;
    try {
        summary = body(r);
    } catch (const std::exception& e) {
        r.fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > limit_s) r.fail("runtime over the limit");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f s of %.0f s", secs, limit_s);
    std::cout << "criterion " << id << " " << title << ": " << (r.ok ? "PASS" : "FAIL") << " (" << summary
              << (summary.empty() ? "" : "; ") << buf << ")";
    if (!r.ok) std::cout << " -- " << r.detail;
    std::cout << std::endl;
    return r.ok;
}

std::string count(const char* what, std::size_t n) { return std::to_string(n) + " " + what; }

// ---- criterion 1 ----

std::string c1(Report& r) {
    std::size_t checks = 0;
    if (eval(corpus::maprev(), parse_word("ab#cd")) != "ba#dc") r.fail("mapRev(ab#cd)");
    ++checks;
    auto ulsq = corpus::ulsq();
    auto sq = corpus::square();
    for_each_word(parse_word("ab"), 6, [&](const Word& u) {
        std::string s = to_string(u), want;
        for (std::size_t i = 0; i < u.size(); ++i) want += s + "#";
        if (eval(ulsq, u) != want) r.fail("ulsq(" + s + ")");
        ++checks;
        if (u.size() > 5) return;
        // marked concatenation: one copy per position, that position marked
        std::string sqw;
        for (std::size_t i = 0; i < u.size(); ++i) {
            for (std::size_t j = 0; j < u.size(); ++j) sqw += std::string(1, u[j].base) + (i == j ? "!" : "");
            sqw += "#";
        }
        if (eval(sq, u) != sqw) r.fail("square(" + s + ")");
        ++checks;
    });
    // every input u_1#u_2 of length at most 6 over {a,b}
    for_each_word(parse_word("ab"), 5, [&](const Word& u1w) {
        for_each_word(parse_word("ab"), 5 - static_cast<int>(u1w.size()), [&](const Word& u2w) {
            std::string u1 = to_string(u1w), u2 = to_string(u2w);
            std::string want = u1 + "#" + u1 + "#" + u2 + "#" + u2 + "#";
            if (corpus::isq_ref(u1 + "#" + u2) != want) r.fail("isq_ref(" + u1 + "#" + u2 + ")");
            ++checks;
        });
    });
    return count("exact comparisons", checks);
}

// ---- criterion 2 ----

std::string c2(Report& r) {
    std::mt19937 rng(2024);
    auto alpha = parse_word("abc");
    std::size_t pairs = 0, positions = 0;
    int max_m = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        int points = 2 + trial % 2;
        auto mu = testing::random_morphism(rng, alpha, points, 6);
        if (mu.target().size() > 6) {
            r.fail("monoid larger than 6");
            continue;
        }
        max_m = std::max(max_m, mu.target().size());
        int n = std::uniform_int_distribution<int>(0, 200)(rng);
        Word u;
        std::uniform_int_distribution<std::size_t> d(0, alpha.size() - 1);
        for (int i = 0; i < n; ++i) u.push_back(alpha[d(rng)]);
        Forest f = build_forest(mu, u);
        auto bad = testing::forest_law_violations(mu, f);
        // leaves spell u
        Word spelled;
        for (const auto& nd : f.nodes())
            if (nd.is_leaf()) spelled.push_back(u[nd.first - 1]);
        if (spelled != u) bad.push_back("leaves do not spell u");
        if (!bad.empty()) r.fail("trial " + std::to_string(trial) + ": " + bad.front());
        ++pairs;
        positions += u.size();
    }
    return count("(mu, u) pairs", pairs) + ", " + count("positions", positions) + ", |M| <= " + std::to_string(max_m);
}

// ---- criterion 3 ----

std::string c3(Report& r) {
    std::map<std::string, const TwoWayTransducer*> all;
    std::vector<PebbleMachine> keep = corpus::all();
    for (const auto& m : keep) {
        std::function<void(const ExplicitNode&)> rec = [&](const ExplicitNode& n) {
            all.emplace(m.name + "/" + n.name(), &n.transducer());
            for (const auto& c : n.children()) rec(*c);
        };
        rec(*m.explicit_root());
    }
    std::size_t samples = 0, violations = 0;
    for (const auto& [key, t] : all) {
        auto mu = transition_morphism({t});
        struct Seen {
            std::vector<int> cs;
            std::string prod;
        };
        std::map<std::tuple<int, int, int>, Seen> seen;
        const auto& a = t->alphabet();
        for (std::size_t x = 0; x < a.size(); ++x)
            for (std::size_t y = x + 1; y < a.size(); ++y) {
                for_each_word({a[x], a[y]}, 7, [&](const Word& u) {
                    Run rho;
                    try {
                        rho = run(*t, u);
                    } catch (const RunError&) {
                        return;
                    }
                    std::vector<int> pre{mu.target().identity()};
                    for (const auto& l : u) pre.push_back(mu.target().mul(pre.back(), mu.image_of(l)));
                    std::vector<int> suf(u.size() + 1, mu.target().identity());
                    for (int i = static_cast<int>(u.size()) - 1; i >= 0; --i)
                        suf[i] = mu.target().mul(mu.image_of(u[i]), suf[i + 1]);
                    for (int i = 1; i <= static_cast<int>(u.size()); ++i) {
                        std::tuple<int, int, int> k{pre[i - 1], mu.letter_index(u[i - 1]), suf[i]};
                        Seen v{crossing_sequence(*t, u, i), production(*t, u, i)};
                        auto [it, fresh] = seen.emplace(k, v);
                        ++samples;
                        if (!fresh && (it->second.cs != v.cs || it->second.prod != v.prod)) {
                            ++violations;
                            r.fail(key + " on " + to_string(u) + " at " + std::to_string(i));
                        }
                    }
                });
            }
    }
    return count("transducers", all.size()) + ", " + count("positions", samples) + ", " +
           count("violations", violations);
}

// ---- criteria 4 to 7 ----

struct LoopStats {
    int machines = 0;
    int pumpable = 0;
    int removed = 0;
    int height_ok = 0;
    std::size_t evaluations = 0;
    int violations = 0;
    std::vector<std::string> slopes;
};
std::map<Variant, LoopStats> loop_stats;

double family_slope(const PebbleMachine& m, const PumpingFamily& fam) {
    std::vector<double> xs, ys;
    for (int x : {4, 8, 16}) {
        xs.push_back(std::log(static_cast<double>(x)));
        ys.push_back(std::log(static_cast<double>(output_length(m, fam.at(x)))));
    }
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / 3, my = std::accumulate(ys.begin(), ys.end(), 0.0) / 3;
    double num = 0, den = 0;
    for (int i = 0; i < 3; ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    return num / den;
}

std::string theorem_loop(Report& r, Variant v, const std::vector<std::string>& names, int max_len) {
    LoopStats& st = loop_stats[v];
    std::mt19937 rng(17);
    for (const auto& name : names) {
        auto m = corpus::make(name);
        if (m.variant != v || m.height() < 2 || m.height() > 3) {
            r.fail(name + " is not a height 2-3 machine of this variant");
            continue;
        }
        ++st.machines;
        auto pump = v == Variant::Blind ? is_pumpable_blind(m) : is_pumpable_last(m);
        if (pump.status == SearchStatus::Inconclusive) {
            r.fail(name + ": pumpability inconclusive");
            continue;
        }
        bool pumpable = pump.status == SearchStatus::Found;
        bool removal_refused = false;
        std::optional<PebbleMachine> removed;
        try {
            removed = v == Variant::Blind ? remove_layer_blind(m) : remove_layer_last(m);
        } catch (const PreconditionError&) {
            removal_refused = true;
        }
        if (pumpable) {
            ++st.pumpable;
            if (!removal_refused) r.fail(name + ": pumpable yet removal went ahead");
            if (recheck(m, *pump.algebra, *pump.witness).size()) r.fail(name + ": witness fails the re-check");
            auto fam = pumping_family(*pump.witness, *pump.algebra);
            double s = family_slope(m, fam);
            char buf[48];
            std::snprintf(buf, sizeof buf, "%s %.2f", name.c_str(), s);
            st.slopes.push_back(buf);
            if (std::abs(s - m.height()) > 0.35) r.fail(name + ": slope off by more than 0.35");
            // exclusivity the other way: a forced removal breaks on the family
            RemoveOptions force;
            force.check_precondition = false;
            bool broke = false;
            try {
                auto f = remove_layer(m, force);
                for (int x = 1; x <= 8 && !broke; ++x) broke = eval(m, fam.at(x)) != eval(f, fam.at(x));
            } catch (const PumpableViolation&) {
                broke = true;
            }
            if (!broke) r.fail(name + ": forced removal of a pumpable machine survived its family");
            continue;
        }
        if (removal_refused || !removed) {
            r.fail(name + ": not pumpable but removal refused");
            continue;
        }
        ++st.removed;
        if (removed->height() == m.height() - 1)
            ++st.height_ok;
        else
            r.fail(name + ": height " + std::to_string(removed->height()) + " after removal");
        try {
            auto e = equivalence_check(m, *removed, max_len);
            st.evaluations += 2 * e.words;
            if (!e.equal) r.fail(name + ": differs on " + to_string(*e.counterexample));
            auto alpha = input_alphabet(m);
            for (int t = 0; t < 20; ++t) {
                Word w;
                std::uniform_int_distribution<std::size_t> d(0, alpha.size() - 1);
                for (int i = 0; i < 12 + 2 * t; ++i) w.push_back(alpha[d(rng)]);
                ++st.evaluations;
                if (eval(m, w) != eval(*removed, w)) r.fail(name + ": differs on " + to_string(w));
            }
            auto mini = minimize(m);
            if (mini.status != MinimizeStatus::Done) r.fail(name + ": minimize inconclusive");
            auto e2 = equivalence_check(m, mini.machine, max_len - 1);
            st.evaluations += e2.words;
            if (!e2.equal) r.fail(name + ": minimized machine differs");
        } catch (const PumpableViolation& e) {
            ++st.violations;
            r.fail(name + ": " + e.what());
        }
    }
    if (st.machines < 5) r.fail("fewer than 5 machines");
    if (st.pumpable == 0 || st.removed == 0) r.fail("one outcome of the loop is never exercised");
    std::string s = std::to_string(st.machines) + " machines, " + std::to_string(st.pumpable) + " pumpable, " +
                    std::to_string(st.removed) + " removed; slopes";
    for (const auto& x : st.slopes) s += " " + x;
    return s;
}

// ---- criterion 8 ----

std::string c8(Report& r) {
    std::mt19937 rng(8);
    std::size_t trees = 0;
    std::string ratios;
    for (int k = 1; k <= 2; ++k) {
        auto z = corpus::zebra(k);
        for (int t = 0; t < 150; ++t) {
            auto tree = corpus::random_tree(rng, k + 1, 3, 2);
            ++trees;
            if (eval_lastlast(z, plain_word(tree)) != corpus::reference_zebra(k, tree)) r.fail("differs on " + tree);
        }
        // sizes 10..60 need wider trees than three children per node
        std::map<int, double> worst;
        int sampled = 0;
        for (int t = 0; t < 20000 && sampled < 300; ++t) {
            auto tree = corpus::random_tree(rng, k + 1, k == 1 ? 20 : 6, 2);
            int n = static_cast<int>(tree.size());
            if (n < 10 || n > 60) continue;
            ++sampled;
            std::string out = eval_lastlast(z, plain_word(tree));
            if (out != corpus::reference_zebra(k, tree)) r.fail("differs on " + tree);
            double q = static_cast<double>(out.size()) / (static_cast<double>(n) * n);
            double& w = worst[n < 30 ? 0 : n < 45 ? 1 : 2];
            w = std::max(w, q);
        }
        double mx = 0;
        for (auto [b, q] : worst) mx = std::max(mx, q);
        if (worst.size() != 3) r.fail("size range 10..60 not covered");
        if (mx > 3.0) r.fail("ratio above 3");
        if (worst[2] > 1.25 * worst[0]) r.fail("ratio grows with |u|");
        char buf[96];
        std::snprintf(buf, sizeof buf, "k=%d max |out|/|u|^2 %.3f (10-29: %.3f, 45-60: %.3f)", k, mx, worst[0], worst[2]);
        ratios += std::string(ratios.empty() ? "" : ", ") + buf;
        trees += sampled;
    }
    return count("trees", trees) + ", " + ratios;
}

// ---- criterion 9 ----

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string capture(const std::string& cmd) {
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return "<popen failed>";
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    int rc = pclose(p);
    return out + "\nexit " + std::to_string(rc);
}

std::string c9(Report& r) {
    const std::string fx = PTK_FIXTURES;
    const std::string bin = PTK_BINARY;
    const std::string text = read_file(fx);
    auto file = parse_machine_file(text);
    if (print_file(file) != text) r.fail("print(parse(fixtures)) differs from the fixtures");
    std::size_t machines = 0;
    for (const auto& name : file.machine_names()) {
        if (file.kind(name) == MachineFile::Kind::Twoway && name != "mapRev" && name != "copier") continue;
        auto m = file.machine(name);
        auto again = parse_machine_file(print_machine(m)).machine(name);
        if (!structurally_equal(m, again)) r.fail(name + ": round trip changes the machine");
        ++machines;
    }
    std::vector<std::vector<std::string>> cmds;
    for (const char* m : {"ulsq", "square", "pos1", "last_pos1", "mapRev", "ulsq_mid"}) {
        std::string word = std::string(m) == "mapRev" ? "ab#cd" : "abba";
        cmds.push_back({"run", fx, "--machine", m, "--word", word});
        cmds.push_back({"growth", fx, "--machine", m});
        cmds.push_back({"pumpable", fx, "--machine", m, "--witness"});
        cmds.push_back({"forest", fx, "--machine", m, "--word", word});
        cmds.push_back({"equiv", fx, fx, "--machine", m, "--machine2", m, "--max-len", "4"});
    }
    cmds.push_back({"equiv", fx, fx, "--machine", "pos1", "--machine2", "first_letter", "--max-len", "5"});
    cmds.push_back({"pumpable", fx, "--machine", "ulsq_mid", "--budget", "3"});
    std::size_t runs = 0;
    for (const auto& c : cmds) {
        std::string line, outs[2];
        for (const auto& a : c) line += " '" + a + "'";
        for (int k = 0; k < 2; ++k) {
            std::ostringstream o, e;
            int code = run_cli(c, o, e);
            outs[k] = o.str() + "\nexit " + std::to_string(code);
        }
        if (outs[0] != outs[1]) r.fail("in-process runs differ:" + line);
        std::string p1 = capture(bin + line + " 2>/dev/null"), p2 = capture(bin + line + " 2>/dev/null");
        if (p1 != p2) r.fail("process runs differ:" + line);
        runs += 4;
    }
    for (const char* m : {"pos1", "ulsq_mid", "last_pos1", "ulsq"}) {
        std::string outs[2];
        for (int k = 0; k < 2; ++k) {
            std::string path = std::string("acceptance_min_") + m + "_" + std::to_string(k) + ".ptk";
            std::string stdout_text = capture(bin + " minimize '" + fx + "' --machine '" + m + "' -o '" + path +
                                              "'" + (std::string(m) == "pos1" ? " --explicate" : "") + " 2>/dev/null");
            outs[k] = stdout_text + read_file(path);
            auto reread = parse_machine_file(read_file(path));
            if (!reread.has(std::string(m) + "'") && !reread.has(m))
                r.fail(std::string(m) + ": minimized file lacks the machine");
            std::remove(path.c_str());
            runs += 1;
        }
        if (outs[0] != outs[1]) r.fail(std::string("minimize differs across runs for ") + m);
    }
    return count("machines round-tripped", machines) + ", " + count("command runs compared", runs);
}

}  // namespace

int main() {
    bool ok = true;
    ok &= run_criterion(1, "corpus exactness", 10, c1);
    ok &= run_criterion(2, "forest laws", 60, c2);
    ok &= run_criterion(3, "crossing-sequence determinism", 60, c3);
    ok &= run_criterion(4, "blind loop", 300, [](Report& r) {
        return theorem_loop(r, Variant::Blind,
                            {"ulsq", "pos1", "ulsq_mid", "ulsq_top", "blind_eps", "cubic", "first_last", "first_letter"},
                            7);
    });
    ok &= run_criterion(5, "last loop", 600, [](Report& r) {
        return theorem_loop(r, Variant::Last,
                            {"square", "last_pos1", "square_top", "last_eps", "mark_only", "right_of_mark", "mid_mark",
                             "prefix"},
                            6);
    });
    ok &= run_criterion(6, "height decrement", 1, [](Report& r) {
        int removed = 0, exact = 0;
        for (auto& [v, st] : loop_stats) {
            removed += st.removed;
            exact += st.height_ok;
        }
        if (removed == 0 || exact != removed) r.fail("a removal missed height k-1");
        return std::to_string(exact) + " of " + std::to_string(removed) + " removals at height k-1";
    });
    ok &= run_criterion(7, "no pumpable-violation assertions", 1, [](Report& r) {
        std::size_t evals = 0;
        int trips = 0;
        for (auto& [v, st] : loop_stats) {
            evals += st.evaluations;
            trips += st.violations;
        }
        if (evals == 0 || trips) r.fail("assertion tripped");
        std::string s = count("evaluations", evals) + ", " + count("trips", trips) + ", max slices per forest height";
        for (auto [h, n] : slice_statistics()) s += " " + std::to_string(h) + ":" + std::to_string(n);
        return s;
    });
    ok &= run_criterion(8, "last-last corpus", 120, c8);
    ok &= run_criterion(9, "CLI determinism", 120, c9);
    std::cout << (ok ? "all criteria pass" : "some criteria fail") << std::endl;
    return ok ? 0 : 1;
}

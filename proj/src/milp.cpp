#include "evtspd/milp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace evtspd {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string family(const std::string& name) {
    std::string fam;
    std::istringstream ss(name);
    std::string tok;
    while (std::getline(ss, tok, '_')) {
        if (all_digits(tok)) break;
        if (!fam.empty()) fam += '_';
        fam += tok;
    }
    return fam;
}

// incremental constraint builder
struct Row {
    ModelSpec& spec;
    ModelConstraint con;
    Row(ModelSpec& s, std::string name) : spec(s) { con.name = std::move(name); }
    Row& t(int var, double coef) {
        if (coef != 0.0) con.terms.push_back({var, coef});
        return *this;
    }
    void done(Sense sense, double rhs) {
        con.sense = sense;
        con.rhs = rhs;
        spec.constraints.push_back(std::move(con));
    }
};

} // namespace

int ModelSpec::var(const std::string& name) const { return var_index.at(name); }

int ModelSpec::add_var(const std::string& name, double lb, double ub, bool binary) {
    int id = static_cast<int>(vars.size());
    vars.push_back({name, lb, ub, binary});
    var_index.emplace(name, id);
    return id;
}

nlohmann::json ModelSpec::audit() const {
    nlohmann::json j;
    std::map<std::string, int> vfam, cfam;
    for (const auto& v : vars) ++vfam[family(v.name)];
    for (const auto& c : constraints) ++cfam[family(c.name)];
    j["variables"] = vfam;
    j["constraints"] = cfam;
    j["variable_total"] = vars.size();
    j["constraint_total"] = constraints.size();
    j["variant"] = variant == Variant::PL ? "pl" : "pp";
    j["segments"] = segments;
    j["big_m_time"] = big_m_time;
    return j;
}

ModelSpec build_model(const AugmentedNetwork& net, const Instance& inst,
                      const ChargingModel& model, Variant variant, const VariantFlags& flags) {
    if (variant == Variant::PL && model.kind != ChargingModel::Kind::Linear)
        throw VariantMismatch("PL export requires a linear charging model");
    if (variant == Variant::PP && model.kind != ChargingModel::Kind::Piecewise)
        throw VariantMismatch("PP export requires a piecewise charging model");

    ModelSpec spec;
    spec.variant = variant;
    spec.flags = flags;
    spec.range_flag = net.has_weight_fn;
    spec.segments = model.n_segments();

    const int n = net.size(); // c + ms + 2
    const int dep0 = net.depot_start(), depE = net.depot_end();
    const double qt = inst.params.qt_s;
    const double gamma = inst.params.gamma;
    const double sl = inst.params.launch_s, sr = inst.params.retrieve_s;

    auto in_nd = [&](int i) { return net.in_nd(i); };
    auto in_na = [&](int i) { return net.in_na(i); };
    auto in_np = [&](int i) { return i != dep0 && i != depE; }; // N'
    auto eT = [&](int i, int j) { return net.ev_energy[i][j] / qt; };
    auto eD = [&](const Sortie& s) {
        return (net.drone_energy[s.launch][s.customer] + net.drone_energy[s.customer][s.retrieve]) / qt;
    };

    // time horizon big-M: full tour plus all charging, service and
    // coordination overheads
    {
        double max_ct = 0.0, sum_service = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) max_ct = std::max(max_ct, net.ev_time[i][j]);
            sum_service += net.nodes[i].service_time_s;
        }
        spec.big_m_time = (n - 1) * max_ct + (n - 2 - net.n_customers) * model.t_full() +
                          sum_service + net.n_customers * (sl + sr + inst.params.qd_s) + 10.0;
    }
    const double M = spec.big_m_time;
    const double Me = 1.0; // energy big-M, normalized capacity

    // ---- variables ----
    auto name2 = [](const char* base, int i) {
        return std::string(base) + "_" + std::to_string(i);
    };
    auto name3 = [](const char* base, int i, int j) {
        return std::string(base) + "_" + std::to_string(i) + "_" + std::to_string(j);
    };
    auto name4 = [](const char* base, int i, int j, int k) {
        return std::string(base) + "_" + std::to_string(i) + "_" + std::to_string(j) + "_" +
               std::to_string(k);
    };

    for (int i = 0; i < n; ++i) {
        if (!in_nd(i)) continue;
        for (int j = 0; j < n; ++j)
            if (in_na(j) && j != i) spec.add_var(name3("x", i, j), 0, 1, true);
    }
    for (const auto& s : net.sorties) spec.add_var(name4("y", s.launch, s.customer, s.retrieve), 0, 1, true);
    for (int i = 0; i < n; ++i)
        if (in_np(i))
            for (int j = 0; j < n; ++j)
                if (in_np(j) && j != i) spec.add_var(name3("p", i, j), 0, 1, true);
    for (int j = 0; j < n; ++j)
        if (in_na(j)) spec.add_var(name3("p", dep0, j), 0, 1, true);
    for (int i = 0; i < n; ++i) spec.add_var(name2("u", i), 1, n, false);
    for (int i = 0; i < n; ++i) spec.add_var(name2("ba", i), 0, 1, false);
    for (int i = 0; i < n; ++i) spec.add_var(name2("bd1", i), 0, 1, false);
    for (int i = 0; i < n; ++i) spec.add_var(name2("bd2", i), 0, 1, false);
    for (int i = 0; i < n; ++i) spec.add_var(name2("ta", i), 0, M, false);
    for (int i = 0; i < n; ++i) spec.add_var(name2("td", i), 0, M, false);
    for (int i = 0; i < n; ++i) spec.add_var(name2("tp", i), 0, M, false);
    if (variant == Variant::PP) {
        for (int r = 0; r < spec.segments; ++r)
            for (int i = 0; i < n; ++i)
                if (net.is_station(i)) spec.add_var(name3("alpha", r, i), 0, 1, true);
        for (int i = 0; i < n; ++i)
            if (net.is_station(i)) spec.add_var(name2("tba", i), 0, model.t_full(), false);
    }
    if (flags.max_leg) {
        for (int i = 0; i < n; ++i)
            if (in_nd(i)) spec.add_var(name2("l", i), 0, n, false);
        for (int k = 0; k < n; ++k)
            if (in_na(k)) spec.add_var(name2("r", k), 0, n, false);
    }
    spec.objective_var = spec.var(name2("ta", depE));

    auto X = [&](int i, int j) { return spec.var(name3("x", i, j)); };
    auto Y = [&](const Sortie& s) { return spec.var(name4("y", s.launch, s.customer, s.retrieve)); };
    auto V = [&](const char* base, int i) { return spec.var(name2(base, i)); };

    // sortie lookups
    auto sorties_from = [&](int i) {
        std::vector<Sortie> out;
        for (const auto& s : net.sorties)
            if (s.launch == i) out.push_back(s);
        return out;
    };
    auto sorties_to = [&](int k) {
        std::vector<Sortie> out;
        for (const auto& s : net.sorties)
            if (s.retrieve == k) out.push_back(s);
        return out;
    };
    auto sorties_serving = [&](int j) {
        std::vector<Sortie> out;
        for (const auto& s : net.sorties)
            if (s.customer == j) out.push_back(s);
        return out;
    };

    // ---- routing ----
    for (int j = 1; j <= net.n_customers; ++j) {
        Row row(spec, name2("c1_visit", j));
        for (int i = 0; i < n; ++i)
            if (in_nd(i) && i != j) row.t(X(i, j), 1);
        for (const auto& s : sorties_serving(j)) row.t(Y(s), 1);
        row.done(Sense::EQ, 1);
    }
    {
        Row row(spec, "c2_depot_out");
        for (int j = 0; j < n; ++j)
            if (in_na(j)) row.t(X(dep0, j), 1);
        row.done(Sense::EQ, 1);
    }
    {
        Row row(spec, "c3_depot_in");
        for (int i = 0; i < n; ++i)
            if (in_nd(i)) row.t(X(i, depE), 1);
        row.done(Sense::EQ, 1);
    }
    for (int i = 0; i < n; ++i) {
        if (!in_np(i)) continue;
        for (int j = 0; j < n; ++j) {
            if (!in_na(j) || j == i) continue;
            Row row(spec, name3("c4_subtour", i, j));
            row.t(V("u", i), 1).t(V("u", j), -1).t(X(i, j), n);
            row.done(Sense::LE, n - 1);
        }
    }
    for (int j = 0; j < n; ++j) {
        if (!in_np(j)) continue;
        Row row(spec, name2("c5_flow", j));
        for (int i = 0; i < n; ++i)
            if (in_nd(i) && i != j) row.t(X(i, j), 1);
        for (int k = 0; k < n; ++k)
            if (in_na(k) && k != j) row.t(X(j, k), -1);
        row.done(Sense::EQ, 0);
    }
    for (int i = 0; i < n; ++i) {
        if (!in_nd(i)) continue;
        auto from = sorties_from(i);
        if (from.empty()) continue;
        Row row(spec, name2("c6_launch", i));
        for (const auto& s : from) row.t(Y(s), 1);
        row.done(Sense::LE, 1);
    }
    for (int k = 0; k < n; ++k) {
        if (!in_na(k)) continue;
        auto to = sorties_to(k);
        if (to.empty()) continue;
        Row row(spec, name2("c7_retrieve", k));
        for (const auto& s : to) row.t(Y(s), 1);
        row.done(Sense::LE, 1);
    }
    for (const auto& s : net.sorties) {
        if (s.launch == dep0) {
            Row row(spec, name3("c9_depot_launch", s.customer, s.retrieve));
            row.t(Y(s), 1);
            for (int h = 0; h < n; ++h)
                if (in_nd(h) && h != s.retrieve) row.t(X(h, s.retrieve), -1);
            row.done(Sense::LE, 0);
        } else {
            Row row(spec, name4("c8_link", s.launch, s.customer, s.retrieve));
            row.t(Y(s), 2);
            for (int h = 0; h < n; ++h)
                if (in_nd(h) && h != s.launch) row.t(X(h, s.launch), -1);
            for (int l = 0; l < n; ++l)
                if (in_nd(l) && l != s.retrieve) row.t(X(l, s.retrieve), -1);
            row.done(Sense::LE, 0);
        }
    }
    for (int i = 0; i < n; ++i) {
        if (!in_nd(i)) continue;
        for (int k = 0; k < n; ++k) {
            if (!in_na(k) || k == i) continue;
            Row row(spec, name3("c10_drone_subtour", i, k));
            for (const auto& s : net.sorties)
                if (s.launch == i && s.retrieve == k) row.t(Y(s), n);
            row.t(V("u", k), -1).t(V("u", i), 1);
            row.done(Sense::LE, n - 1);
        }
    }

    // ---- energy ----
    for (int i = 0; i < n; ++i) {
        if (!in_nd(i)) continue;
        for (int j = 0; j < n; ++j) {
            if (!in_na(j) || j == i) continue;
            Row row(spec, name3("c11_energy", i, j));
            row.t(V("ba", j), 1).t(V("bd2", i), -1).t(X(i, j), eT(i, j) + Me);
            row.done(Sense::LE, Me);
        }
    }
    {
        Row row(spec, "c12_depot_soc");
        row.t(V("ba", dep0), 1);
        row.done(Sense::EQ, 1);
    }
    for (int i = 0; i < n; ++i) {
        if (i == dep0 || net.is_customer(i)) { // C u {0}
            Row row(spec, name2("c13_customer_soc", i));
            row.t(V("ba", i), 1).t(V("bd1", i), -1);
            row.done(Sense::EQ, 0);
        } else if (net.is_station(i)) {
            Row row(spec, name2("c14_station_soc", i));
            row.t(V("ba", i), 1).t(V("bd1", i), -1);
            row.done(Sense::LE, 0);
        }
    }
    for (int i = 0; i < n; ++i) {
        if (!in_nd(i)) continue;
        Row row(spec, name2("c15_launch_drain", i));
        row.t(V("bd2", i), 1).t(V("bd1", i), -1);
        for (const auto& s : sorties_from(i)) row.t(Y(s), gamma * eD(s));
        row.done(Sense::EQ, 0);
    }

    // ---- coordination ----
    for (int i = 0; i < n; ++i) {
        if (!in_nd(i)) continue;
        Row lo(spec, name2("c17_sync_launch_lo", i));
        lo.t(V("tp", i), 1).t(V("td", i), -1);
        for (const auto& s : sorties_from(i)) lo.t(Y(s), -M);
        lo.done(Sense::GE, -M);
        Row hi(spec, name2("c18_sync_launch_hi", i));
        hi.t(V("tp", i), 1).t(V("td", i), -1);
        for (const auto& s : sorties_from(i)) hi.t(Y(s), M);
        hi.done(Sense::LE, M);
    }
    for (int k = 0; k < n; ++k) {
        if (!in_na(k)) continue;
        Row lo(spec, name2("c19_sync_retrieve_lo", k));
        lo.t(V("tp", k), 1).t(V("ta", k), -1);
        for (const auto& s : sorties_to(k)) lo.t(Y(s), -M);
        lo.done(Sense::GE, -M);
        Row hi(spec, name2("c20_sync_retrieve_hi", k));
        hi.t(V("tp", k), 1).t(V("ta", k), -1);
        for (const auto& s : sorties_to(k)) hi.t(Y(s), M);
        hi.done(Sense::LE, M);
    }
    for (int h = 0; h < n; ++h) {
        if (!in_nd(h)) continue;
        for (int k = 0; k < n; ++k) {
            if (!in_na(k) || k == h) continue;
            if (!flags.lrt) {
                Row row(spec, name3("c21_ev_time", h, k));
                row.t(V("td", h), 1).t(V("ta", k), -1).t(X(h, k), net.ev_time[h][k] + M);
                row.done(Sense::LE, M);
            } else {
                Row row(spec, name3("lrt35_ev_time", h, k));
                row.t(V("td", h), 1).t(V("ta", k), -1).t(X(h, k), net.ev_time[h][k] + M);
                for (const auto& s : sorties_from(h)) row.t(Y(s), sl);
                for (const auto& s : sorties_to(k)) {
                    // S_L and S_R coefficients may meet on one y variable
                    bool merged = false;
                    for (auto& term : row.con.terms)
                        if (term.var == Y(s)) {
                            term.coef += sr;
                            merged = true;
                        }
                    if (!merged) row.t(Y(s), sr);
                }
                row.done(Sense::LE, M);
            }
        }
    }
    for (int j = 0; j < n; ++j) {
        if (j != dep0 && !net.is_customer(j)) continue; // C u {0}
        Row row(spec, name2("new1_service", j));
        row.t(V("td", j), 1).t(V("ta", j), -1);
        row.done(Sense::GE, net.nodes[j].service_time_s);
    }
    if (variant == Variant::PL) {
        double H = model.h();
        for (int j = 0; j < n; ++j) {
            if (!net.is_station(j)) continue;
            Row row(spec, name2("pl6_charge_time", j));
            row.t(V("td", j), 1).t(V("ta", j), -1).t(V("bd1", j), -H).t(V("ba", j), H);
            row.done(Sense::GE, 0);
        }
    }
    for (int j = 1; j <= net.n_customers; ++j) {
        for (int i = 0; i < n; ++i) {
            if (!in_nd(i) || i == j) continue;
            auto via = sorties_from(i);
            std::vector<Sortie> both;
            for (const auto& s : via)
                if (s.customer == j) both.push_back(s);
            if (both.empty()) continue;
            Row row(spec, name3("c22_drone_out", i, j));
            row.t(V("tp", i), 1).t(V("tp", j), -1);
            for (const auto& s : both) row.t(Y(s), M);
            row.done(Sense::LE, M - net.drone_time[i][j] - net.nodes[j].service_time_s);
        }
        for (int k = 0; k < n; ++k) {
            if (!in_na(k) || k == j) continue;
            std::vector<Sortie> both;
            for (const auto& s : sorties_to(k))
                if (s.customer == j) both.push_back(s);
            if (both.empty()) continue;
            const char* nm = flags.lrt ? "lrt36_drone_back" : "c23_drone_back";
            Row row(spec, name3(nm, j, k));
            row.t(V("tp", j), 1).t(V("tp", k), -1);
            for (const auto& s : both) row.t(Y(s), M);
            row.done(Sense::LE, M - net.drone_time[j][k] - (flags.lrt ? sr : 0.0));
        }
    }

    // ---- ordering ----
    for (const auto& s : net.sorties) {
        Row row(spec, name4("c24_range", s.launch, s.customer, s.retrieve));
        row.t(V("tp", s.retrieve), 1).t(V("tp", s.customer), -1).t(Y(s), M);
        row.done(Sense::LE, net.budget(s.customer) - net.drone_time[s.launch][s.customer] + M);
    }
    for (int i = 0; i < n; ++i) {
        if (!in_np(i)) continue;
        for (int j = 0; j < n; ++j) {
            if (!in_np(j) || j == i) continue;
            Row row(spec, name3("c25_order", i, j));
            row.t(V("u", i), 1).t(V("u", j), -1).t(spec.var(name3("p", i, j)), n);
            row.done(Sense::LE, n - 1);
        }
    }
    for (int i = 0; i < n; ++i) {
        if (!in_np(i)) continue;
        for (int j = i + 1; j < n; ++j) {
            if (!in_np(j)) continue;
            Row row(spec, name3("c26_order_pair", i, j));
            row.t(spec.var(name3("p", i, j)), 1).t(spec.var(name3("p", j, i)), 1);
            row.done(Sense::EQ, 1);
        }
    }
    for (int i = 0; i < n; ++i) {
        if (!in_nd(i)) continue;
        for (int l = 0; l < n; ++l) {
            if (!in_nd(l) || l == i || l == dep0) continue; // p_il needs l in N'
            auto from_l = sorties_from(l);
            if (from_l.empty()) continue;
            for (int k = 0; k < n; ++k) {
                if (!in_na(k) || k == i || k == l) continue;
                std::vector<Sortie> into_k;
                for (const auto& s : sorties_to(k))
                    if (s.launch == i && s.customer != l) into_k.push_back(s);
                if (into_k.empty()) continue;
                std::vector<Sortie> second;
                for (const auto& s : from_l)
                    if (s.customer != i && s.customer != k && s.retrieve != i && s.retrieve != k)
                        second.push_back(s);
                if (second.empty()) continue;
                Row row(spec, name4("c27_no_interleave", i, l, k));
                row.t(V("tp", k), 1).t(V("tp", l), -1);
                for (const auto& s : into_k) row.t(Y(s), M);
                for (const auto& s : second) row.t(Y(s), M);
                int pil = i == dep0 ? spec.var(name3("p", dep0, l)) : spec.var(name3("p", i, l));
                row.t(pil, M);
                row.done(Sense::LE, 3 * M);
            }
        }
    }
    {
        Row row(spec, "c28_start_time");
        row.t(V("ta", dep0), 1);
        row.done(Sense::EQ, 0);
    }
    for (int j = 0; j < n; ++j) {
        if (!in_na(j)) continue;
        Row row(spec, name2("c29_depot_first", j));
        row.t(spec.var(name3("p", dep0, j)), 1);
        row.done(Sense::EQ, 1);
    }

    // ---- piecewise charging (PP) ----
    if (variant == Variant::PP) {
        // breakpoint SoC values s_r, r = 0..R
        const auto& bp = model.breakpoints;
        double Ma = model.segments.front().slope * model.t_full() + 1.0;
        for (int i = 0; i < n; ++i) {
            if (!net.is_station(i)) continue;
            for (int r = 0; r < spec.segments; ++r) {
                double K = model.segments[r].slope, B = model.segments[r].intercept;
                {
                    Row row(spec, name3("pp2_secant", r, i));
                    row.t(V("bd1", i), 1).t(V("tba", i), -K).t(V("td", i), -K).t(V("ta", i), K);
                    row.done(Sense::LE, B);
                }
                {
                    Row row(spec, name3("nc1_seg_lo", r, i));
                    row.t(V("ba", i), -1).t(spec.var(name3("alpha", r, i)), 1);
                    row.done(Sense::LE, 1 - bp[r].second);
                }
                {
                    Row row(spec, name3("nc2_seg_hi", r, i));
                    row.t(V("ba", i), 1).t(spec.var(name3("alpha", r, i)), 1);
                    row.done(Sense::LE, 1 + bp[r + 1].second);
                }
                {
                    Row row(spec, name3("nc4_tba_lo", r, i));
                    row.t(V("ba", i), -1).t(V("tba", i), K).t(spec.var(name3("alpha", r, i)), Ma);
                    row.done(Sense::LE, Ma - B);
                }
                {
                    Row row(spec, name3("nc5_tba_hi", r, i));
                    row.t(V("ba", i), 1).t(V("tba", i), -K).t(spec.var(name3("alpha", r, i)), Ma);
                    row.done(Sense::LE, Ma + B);
                }
            }
            {
                Row row(spec, name2("nc3_one_segment", i));
                for (int r = 0; r < spec.segments; ++r) row.t(spec.var(name3("alpha", r, i)), 1);
                row.done(Sense::EQ, 1);
            }
            {
                // stations have no service time; charging enters via pp2
                Row row(spec, name2("nc6_station_dwell", i));
                row.t(V("td", i), 1).t(V("ta", i), -1);
                row.done(Sense::GE, 0);
            }
        }
    }

    // ---- MaxLeg linearization ----
    if (flags.max_leg) {
        double Mu = n;
        int nbar = *flags.max_leg;
        for (const auto& s : net.sorties) {
            {
                // position gap: at most nbar nodes strictly inside the leg
                Row row(spec, name4("ml38_leg", s.launch, s.customer, s.retrieve));
                row.t(V("r", s.retrieve), 1).t(V("l", s.launch), -1).t(Y(s), Mu);
                row.done(Sense::LE, nbar + 1 + Mu);
            }
            {
                Row row(spec, name4("ml41_launch_lb", s.launch, s.customer, s.retrieve));
                row.t(V("u", s.launch), 1).t(V("l", s.launch), -1).t(Y(s), Mu);
                row.done(Sense::LE, Mu);
            }
            {
                Row row(spec, name4("ml44_retrieve_lb", s.launch, s.customer, s.retrieve));
                row.t(V("u", s.retrieve), 1).t(V("r", s.retrieve), -1).t(Y(s), Mu);
                row.done(Sense::LE, Mu);
            }
        }
        for (int i = 0; i < n; ++i) {
            if (!in_nd(i)) continue;
            auto from = sorties_from(i);
            {
                Row row(spec, name2("ml39_launch_ub", i));
                row.t(V("l", i), 1);
                for (const auto& s : from) row.t(Y(s), -Mu);
                row.done(Sense::LE, 0);
            }
            Row row(spec, name2("ml40_launch_u", i));
            row.t(V("l", i), 1).t(V("u", i), -1);
            row.done(Sense::LE, 0);
        }
        for (int k = 0; k < n; ++k) {
            if (!in_na(k)) continue;
            auto to = sorties_to(k);
            {
                Row row(spec, name2("ml42_retrieve_ub", k));
                row.t(V("r", k), 1);
                for (const auto& s : to) row.t(Y(s), -Mu);
                row.done(Sense::LE, 0);
            }
            Row row(spec, name2("ml43_retrieve_u", k));
            row.t(V("r", k), 1).t(V("u", k), -1);
            row.done(Sense::LE, 0);
        }
    }

    return spec;
}

std::string lp_text(const ModelSpec& spec) {
    std::ostringstream out;
    out << "Minimize\n obj: " << spec.vars[spec.objective_var].name << "\n";
    out << "Subject To\n";
    for (const auto& c : spec.constraints) {
        out << ' ' << c.name << ':';
        for (const auto& t : c.terms) {
            double v = t.coef;
            out << (v < 0 ? " - " : " + ") << num(std::fabs(v)) << ' ' << spec.vars[t.var].name;
        }
        out << (c.sense == Sense::LE ? " <= " : c.sense == Sense::GE ? " >= " : " = ");
        out << num(c.rhs) << '\n';
    }

    std::vector<const ModelVar*> order;
    for (const auto& v : spec.vars) order.push_back(&v);
    std::sort(order.begin(), order.end(),
              [](const ModelVar* a, const ModelVar* b) { return a->name < b->name; });

    out << "Bounds\n";
    for (const auto* v : order)
        if (!v->binary) out << ' ' << num(v->lb) << " <= " << v->name << " <= " << num(v->ub) << '\n';
    out << "Binaries\n";
    for (const auto* v : order)
        if (v->binary) out << ' ' << v->name << '\n';
    out << "End\n";
    return out.str();
}

void write_lp(const ModelSpec& spec, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << lp_text(spec);
    if (!f) throw std::runtime_error("write failed: " + path);
}

Solution solution_from_assignment(const ModelSpec&, const AugmentedNetwork& net,
                                  const Assignment& values) {
    auto val = [&](const std::string& name) {
        auto it = values.find(name);
        return it == values.end() ? 0.0 : it->second;
    };
    int n = net.size();
    std::vector<int> succ(n, -1);
    for (int i = 0; i < n; ++i) {
        if (!net.in_nd(i)) continue;
        for (int j = 0; j < n; ++j) {
            if (!net.in_na(j) || j == i) continue;
            if (val("x_" + std::to_string(i) + "_" + std::to_string(j)) > 0.5) {
                if (succ[i] >= 0)
                    throw DecodeError("c5_flow: node " + std::to_string(i) + " has two successors");
                succ[i] = j;
            }
        }
    }
    Solution sol;
    std::vector<char> seen(n, 0);
    int cur = net.depot_start();
    while (true) {
        if (seen[cur]) throw DecodeError("c4_subtour: route revisits node " + std::to_string(cur));
        seen[cur] = 1;
        sol.ev_route.push_back(cur);
        if (cur == net.depot_end()) break;
        if (succ[cur] < 0)
            throw DecodeError("c5_flow: route stops at node " + std::to_string(cur));
        cur = succ[cur];
    }
    for (const auto& s : net.sorties) {
        std::string yn = "y_" + std::to_string(s.launch) + "_" + std::to_string(s.customer) + "_" +
                         std::to_string(s.retrieve);
        if (val(yn) > 0.5) sol.sorties.push_back(s);
    }
    return sol;
}

Assignment assignment_from_solution(const ModelSpec& spec, const Solution& sol,
                                    const AugmentedNetwork& net, const Instance& inst,
                                    const ChargingModel& model) {
    EvalResult res = evaluate(sol, net, inst, model, spec.flags);
    if (!res.ok()) throw std::invalid_argument("assignment requires a feasible solution");
    const Timeline& tl = res.timeline;
    const int n = net.size();
    const double sr = spec.flags.lrt ? inst.params.retrieve_s : 0.0;

    Assignment a;
    for (const auto& v : spec.vars) a[v.name] = 0.0;
    auto set = [&](const std::string& name, double v) {
        auto it = a.find(name);
        if (it != a.end()) it->second = v;
    };
    auto nm2 = [](const char* b, int i) { return std::string(b) + "_" + std::to_string(i); };

    std::vector<int> pos(n, -1);
    for (std::size_t p = 0; p < sol.ev_route.size(); ++p) pos[sol.ev_route[p]] = static_cast<int>(p);

    // u: route order first, unvisited nodes after in index order
    std::vector<double> u(n, 0.0);
    int next_u = 1;
    for (int v : sol.ev_route) u[v] = next_u++;
    for (int i = 0; i < n; ++i)
        if (pos[i] < 0) u[i] = next_u++;
    for (int i = 0; i < n; ++i) set(nm2("u", i), u[i]);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (j != i) set("p_" + std::to_string(i) + "_" + std::to_string(j), u[i] < u[j] ? 1 : 0);

    for (std::size_t p = 0; p + 1 < sol.ev_route.size(); ++p)
        set("x_" + std::to_string(sol.ev_route[p]) + "_" + std::to_string(sol.ev_route[p + 1]), 1);
    for (const auto& s : sol.sorties)
        set("y_" + std::to_string(s.launch) + "_" + std::to_string(s.customer) + "_" +
                std::to_string(s.retrieve),
            1);

    std::vector<int> launch_at(n, -1), retrieve_at(n, -1);
    for (std::size_t s = 0; s < sol.sorties.size(); ++s) {
        launch_at[sol.sorties[s].launch] = static_cast<int>(s);
        retrieve_at[sol.sorties[s].retrieve] = static_cast<int>(s);
    }

    for (int i = 0; i < n; ++i) {
        if (pos[i] < 0) { // unvisited station copies
            set(nm2("ba", i), 1);
            set(nm2("bd1", i), 1);
            set(nm2("bd2", i), 1);
            set(nm2("ta", i), 0);
            set(nm2("td", i), net.nodes[i].service_time_s);
            set(nm2("tp", i), 0);
            continue;
        }
        double ba = tl.soc_arrive[i], bd1 = tl.soc_dep_pre[i], bd2 = tl.soc_dep_post[i];
        set(nm2("ba", i), ba);
        set(nm2("bd1", i), bd1);
        set(nm2("bd2", i), bd2);

        // MILP arrival absorbs forced waiting: ta = td - on-node dwell
        double dwell = 0.0;
        if (net.is_customer(i)) dwell = net.nodes[i].service_time_s;
        if (net.is_station(i) && bd1 > ba) dwell = charge_duration(model, ba, bd1);
        double ta = tl.t_depart[i] - dwell;
        set(nm2("ta", i), ta);
        set(nm2("td", i), tl.t_depart[i]);

        double tp = ta;
        if (launch_at[i] >= 0) tp = tl.t_depart[i];
        if (retrieve_at[i] >= 0) tp = ta;
        set(nm2("tp", i), tp);
    }
    set(nm2("ta", net.depot_start()), 0);
    // drone leaves the customer as late as the rendezvous allows (wait model)
    for (const auto& s : sol.sorties) {
        double tpk = a.at(nm2("tp", s.retrieve));
        set(nm2("tp", s.customer), tpk - net.drone_time[s.customer][s.retrieve] - sr);
    }

    if (spec.variant == Variant::PP) {
        const auto& bp = model.breakpoints;
        for (int i = 0; i < n; ++i) {
            if (!net.is_station(i)) continue;
            double ba = a.at(nm2("ba", i));
            int r = 0;
            while (r + 1 < spec.segments && ba > bp[r + 1].second) ++r;
            set("alpha_" + std::to_string(r) + "_" + std::to_string(i), 1);
            double K = model.segments[r].slope, B = model.segments[r].intercept;
            set(nm2("tba", i), (ba - B) / K);
        }
    }
    if (spec.flags.max_leg) {
        for (int i = 0; i < n; ++i) {
            if (launch_at[i] >= 0) set(nm2("l", i), u[i]);
            if (retrieve_at[i] >= 0) set(nm2("r", i), u[i]);
        }
    }
    return a;
}

double max_residual(const ModelSpec& spec, const Assignment& values, std::string* worst) {
    double worst_v = 0.0;
    for (const auto& c : spec.constraints) {
        double lhs = 0.0;
        for (const auto& t : c.terms) lhs += t.coef * values.at(spec.vars[t.var].name);
        double viol = 0.0;
        switch (c.sense) {
        case Sense::LE: viol = lhs - c.rhs; break;
        case Sense::GE: viol = c.rhs - lhs; break;
        case Sense::EQ: viol = std::fabs(lhs - c.rhs); break;
        }
        if (viol > worst_v) {
            worst_v = viol;
            if (worst) *worst = c.name;
        }
    }
    for (const auto& v : spec.vars) {
        double x = values.at(v.name);
        double viol = std::max(v.lb - x, x - v.ub);
        if (viol > worst_v) {
            worst_v = viol;
            if (worst) *worst = "bound:" + v.name;
        }
    }
    return worst_v;
}

} // namespace evtspd

#include "amap/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace amap {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> tokens(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view s)
{
    T value{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
    }
    return value;
}

double parse_double(std::string_view s)
{
    const auto t = tokens(s);
    if (t.size() != 1) {
        throw std::invalid_argument("expected one number");
    }
    return parse_number<double>(t[0]);
}

long long parse_int(std::string_view s)
{
    const auto t = tokens(s);
    if (t.size() != 1) {
        throw std::invalid_argument("expected one integer");
    }
    return parse_number<long long>(t[0]);
}

std::vector<double> parse_doubles(std::string_view s, std::size_t count)
{
    const auto t = tokens(s);
    if (t.size() != count) {
        throw std::invalid_argument("expected " + std::to_string(count) + " numbers");
    }
    std::vector<double> out;
    for (auto tok : t) out.push_back(parse_number<double>(tok));
    return out;
}

Vec3 parse_vec3(std::string_view s)
{
    const auto v = parse_doubles(s, 3);
    return {v[0], v[1], v[2]};
}

std::string format_vec3(const Vec3& v)
{
    return format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z());
}

std::string parse_word(std::string_view s)
{
    const auto t = tokens(s);
    if (t.size() != 1) {
        throw std::invalid_argument("expected one word");
    }
    return std::string(t[0]);
}

std::string_view to_string(TrajectoryBackend b) { return b == TrajectoryBackend::MinimumSnap ? "min_snap" : "linear"; }

TrajectoryBackend backend_from_string(std::string_view s)
{
    if (s == "min_snap") return TrajectoryBackend::MinimumSnap;
    if (s == "linear") return TrajectoryBackend::PiecewiseLinear;
    throw std::invalid_argument("unknown trajectory backend '" + std::string(s) + "'");
}

struct Key {
    std::string name;
    std::function<void(ExperimentConfig&, std::string_view)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define AMAP_DOUBLE(key, field)                                                                                     \
    Key{key, [](ExperimentConfig& c, std::string_view v) { c.field = parse_double(v); },                          \
        [](const ExperimentConfig& c) { return format_double(c.field); }}
#define AMAP_INT(key, field)                                                                                        \
    Key{key, [](ExperimentConfig& c, std::string_view v) { c.field = static_cast<decltype(c.field)>(parse_int(v)); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }}
#define AMAP_VEC3(key, field)                                                                                       \
    Key{key, [](ExperimentConfig& c, std::string_view v) { c.field = parse_vec3(v); },                            \
        [](const ExperimentConfig& c) { return format_vec3(c.field); }}

const std::vector<Key>& keys()
{
    static const std::vector<Key> table = {
        Key{"name", [](ExperimentConfig& c, std::string_view v) { c.name = trim(v).empty() ? "" : parse_word(v); },
            [](const ExperimentConfig& c) { return c.name; }},
        AMAP_VEC3("world.origin_m", world.origin),
        AMAP_VEC3("world.extent_m", world.extent),
        AMAP_VEC3("world.resolution_m", world.resolution),
        AMAP_VEC3("world.start_m", world.start),
        AMAP_DOUBLE("world.budget_s", world.budget),
        AMAP_INT("world.landmarks", world.landmark_count),
        AMAP_DOUBLE("world.landmark_strip", world.landmark_strip),
        AMAP_DOUBLE("world.landmark_depth_m", world.landmark_depth),
        AMAP_DOUBLE("world.initial_pose_sigma_m", world.initial_pose_sigma),
        AMAP_DOUBLE("sensor.rate_hz", world.sensor_rate),
        Key{"field.kernel",
            [](ExperimentConfig& c, std::string_view v) { c.field_kernel.family = kernel_family_from_string(parse_word(v)); },
            [](const ExperimentConfig& c) { return std::string(to_string(c.field_kernel.family)); }},
        AMAP_DOUBLE("field.signal_variance", field_kernel.hyper.signal_variance),
        AMAP_DOUBLE("field.length_scale_m", field_kernel.hyper.length_scale),
        AMAP_DOUBLE("field.noise_variance", field_kernel.hyper.noise_variance),
        Key{"gp.kernel",
            [](ExperimentConfig& c, std::string_view v) { c.map_kernel.family = kernel_family_from_string(parse_word(v)); },
            [](const ExperimentConfig& c) { return std::string(to_string(c.map_kernel.family)); }},
        AMAP_DOUBLE("gp.signal_variance", map_kernel.hyper.signal_variance),
        AMAP_DOUBLE("gp.length_scale_m", map_kernel.hyper.length_scale),
        AMAP_DOUBLE("gp.noise_variance", map_kernel.hyper.noise_variance),
        AMAP_DOUBLE("gp.prior_mean", prior_mean),
        AMAP_INT("gp.train_samples", train_samples),
        Key{"gp.mapping_mode",
            [](ExperimentConfig& c, std::string_view v) { c.mapping_mode = kernel_mode_from_string(parse_word(v)); },
            [](const ExperimentConfig& c) { return std::string(to_string(c.mapping_mode)); }},
        AMAP_INT("gp.quadrature_order", quadrature_order),
        Key{"planner.kind",
            [](ExperimentConfig& c, std::string_view v) { c.planner = planner_kind_from_string(parse_word(v)); },
            [](const ExperimentConfig& c) { return std::string(to_string(c.planner)); }},
        Key{"planner.utility",
            [](ExperimentConfig& c, std::string_view v) { c.utility.variant = utility_variant_from_string(parse_word(v)); },
            [](const ExperimentConfig& c) { return std::string(to_string(c.utility.variant)); }},
        AMAP_DOUBLE("planner.w_map", utility.w_map),
        AMAP_DOUBLE("planner.w_pose", utility.w_pose),
        AMAP_INT("planner.waypoints", n_waypoints),
        Key{"planner.lattice",
            [](ExperimentConfig& c, std::string_view v) {
                const auto t = tokens(v);
                if (t.size() != 3) throw std::invalid_argument("expected 3 integers");
                for (std::size_t i = 0; i < 3; ++i) c.lattice_counts[i] = parse_number<int>(t[i]);
            },
            [](const ExperimentConfig& c) {
                return std::to_string(c.lattice_counts[0]) + " " + std::to_string(c.lattice_counts[1]) + " " +
                       std::to_string(c.lattice_counts[2]);
            }},
        Key{"trajectory.backend",
            [](ExperimentConfig& c, std::string_view v) { c.trajectory.backend = backend_from_string(parse_word(v)); },
            [](const ExperimentConfig& c) { return std::string(to_string(c.trajectory.backend)); }},
        AMAP_DOUBLE("trajectory.v_ref", trajectory.v_ref),
        AMAP_DOUBLE("trajectory.a_ref", trajectory.a_ref),
        AMAP_INT("trajectory.order", trajectory.order),
        AMAP_INT("trajectory.pinned_derivatives", trajectory.pinned_end_derivatives),
        AMAP_INT("cmaes.max_evaluations", cmaes.max_evaluations),
        AMAP_DOUBLE("cmaes.sigma0_m", cmaes.sigma0),
        AMAP_INT("cmaes.population", cmaes.population),
        AMAP_DOUBLE("rig.step_m", rig.step),
        AMAP_INT("rig.iterations", rig.iterations),
        Key{"camera.fov_deg",
            [](ExperimentConfig& c, std::string_view v) {
                const auto f = parse_doubles(v, 2);
                c.camera.fov_horizontal_deg = f[0];
                c.camera.fov_vertical_deg = f[1];
            },
            [](const ExperimentConfig& c) {
                return format_double(c.camera.fov_horizontal_deg) + " " + format_double(c.camera.fov_vertical_deg);
            }},
        AMAP_DOUBLE("camera.pixel_sigma", camera.pixel_sigma),
        AMAP_DOUBLE("camera.depth_sigma_m", camera.depth_sigma),
        AMAP_VEC3("motion.noise_coefficient", motion_noise.coefficient),
        AMAP_DOUBLE("motion.interp_hz", interp_hz),
        AMAP_INT("experiment.trials", trials),
        AMAP_INT("experiment.base_seed", base_seed),
        Key{"experiment.output",
            [](ExperimentConfig& c, std::string_view v) { c.output = std::string(trim(v)); },
            [](const ExperimentConfig& c) { return c.output.string(); }},
    };
    return table;
}

#undef AMAP_DOUBLE
#undef AMAP_INT
#undef AMAP_VEC3

}  // namespace

std::string_view to_string(PlannerKind kind)
{
    switch (kind) {
    case PlannerKind::TwoStep: return "two_step";
    case PlannerKind::RigTree: return "rig_tree";
    case PlannerKind::Random: return "random";
    }
    return "unknown";
}

PlannerKind planner_kind_from_string(std::string_view name)
{
    if (name == "two_step") return PlannerKind::TwoStep;
    if (name == "rig_tree") return PlannerKind::RigTree;
    if (name == "random") return PlannerKind::Random;
    throw std::invalid_argument("unknown planner '" + std::string(name) + "'");
}

ParseError::ParseError(int line, std::string key, const std::string& message)
    : Error("line " + std::to_string(line) + (key.empty() ? "" : " (" + key + ")") + ": " + message), line_(line),
      key_(std::move(key))
{
}

namespace {

std::string join_violations(const std::vector<std::string>& v)
{
    std::string out = "invalid configuration:";
    for (const auto& s : v) out += "\n  " + s;
    return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations))
{
}

std::string ExperimentConfig::stem() const
{
    if (!name.empty()) {
        return name;
    }
    return std::string(to_string(planner)) + "_" + std::string(to_string(utility.variant)) + "_" +
           std::string(to_string(mapping_mode));
}

PlannerConfig ExperimentConfig::planner_config() const
{
    PlannerConfig p;
    p.n_waypoints = n_waypoints;
    p.lattice = uniform_lattice(world.lower(), world.upper(), lattice_counts);
    p.cmaes = cmaes;
    p.rig = rig;
    p.utility = utility;
    p.trajectory = trajectory;
    p.camera = camera;
    p.noise = motion_noise;
    p.sensor_rate = world.sensor_rate;
    p.interp_hz = interp_hz;
    p.lower = world.lower();
    p.upper = world.upper();
    return p;
}

void ExperimentConfig::validate() const
{
    std::vector<std::string> v;
    auto require = [&v](bool ok, const std::string& message) {
        if (!ok) v.push_back(message);
    };
    require((world.extent.array() >= 0.0).all(), "world.extent_m must be non-negative");
    require((world.resolution.array() > 0.0).all(), "world.resolution_m must be positive");
    require(((world.start - world.lower()).array() >= -1e-9).all() &&
                ((world.start - world.upper()).array() <= 1e-9).all(),
            "world.start_m must lie inside the workspace");
    require(world.budget > 0.0, "world.budget_s must be positive");
    require(world.landmark_count >= 0, "world.landmarks must be non-negative");
    require(world.landmark_strip > 0.0 && world.landmark_strip <= 1.0, "world.landmark_strip must lie in (0, 1]");
    require(world.landmark_depth > 0.0, "world.landmark_depth_m must be positive");
    require(world.initial_pose_sigma > 0.0, "world.initial_pose_sigma_m must be positive");
    require(world.sensor_rate > 0.0, "sensor.rate_hz must be positive");
    for (const auto& [prefix, k] : {std::pair{"field", &field_kernel}, std::pair{"gp", &map_kernel}}) {
        require(k->hyper.signal_variance > 0.0, std::string(prefix) + ".signal_variance must be positive");
        require(k->hyper.length_scale > 0.0, std::string(prefix) + ".length_scale_m must be positive");
        require(k->hyper.noise_variance > 0.0, std::string(prefix) + ".noise_variance must be positive");
    }
    require(train_samples == 0 || train_samples >= 5, "gp.train_samples must be 0 or at least 5");
    require(quadrature_order >= 1 && quadrature_order <= 20, "gp.quadrature_order must lie in [1, 20]");
    require(n_waypoints >= 2, "planner.waypoints must be at least 2");
    require(lattice_counts[0] >= 1 && lattice_counts[1] >= 1 && lattice_counts[2] >= 1,
            "planner.lattice counts must be positive");
    require(utility.w_map >= 0.0 && utility.w_pose >= 0.0, "planner.w_map and planner.w_pose must be non-negative");
    require(trajectory.v_ref > 0.0, "trajectory.v_ref must be positive");
    require(trajectory.a_ref > 0.0, "trajectory.a_ref must be positive");
    require(trajectory.order >= 7 && trajectory.order <= 20, "trajectory.order must lie in [7, 20]");
    require(trajectory.pinned_end_derivatives >= 0 && trajectory.pinned_end_derivatives <= 3,
            "trajectory.pinned_derivatives must lie in [0, 3]");
    require(cmaes.max_evaluations >= 0, "cmaes.max_evaluations must be non-negative");
    require(cmaes.sigma0 > 0.0, "cmaes.sigma0_m must be positive");
    require(cmaes.population >= 0, "cmaes.population must be non-negative");
    require(rig.step > 0.0, "rig.step_m must be positive");
    require(rig.iterations >= 0, "rig.iterations must be non-negative");
    require(camera.fov_horizontal_deg > 0.0 && camera.fov_horizontal_deg < 180.0 && camera.fov_vertical_deg > 0.0 &&
                camera.fov_vertical_deg < 180.0,
            "camera.fov_deg must lie in (0, 180)");
    require(camera.pixel_sigma > 0.0, "camera.pixel_sigma must be positive");
    require(camera.depth_sigma > 0.0, "camera.depth_sigma_m must be positive");
    require((motion_noise.coefficient.array() >= 0.0).all(), "motion.noise_coefficient must be non-negative");
    require(interp_hz > 0.0, "motion.interp_hz must be positive");
    require(trials >= 1, "experiment.trials must be at least 1");
    if (!v.empty()) {
        throw ValidationError(std::move(v));
    }
}

std::string ExperimentConfig::to_text() const
{
    std::ostringstream out;
    for (const Key& k : keys()) {
        out << k.name << " = " << k.get(*this) << '\n';
    }
    return out.str();
}

ExperimentConfig parse_config_text(std::string_view text)
{
    ExperimentConfig cfg;
    std::set<std::string> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(line_no, "", "expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto& table = keys();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
        if (it == table.end()) {
            throw ParseError(line_no, key, "unknown key");
        }
        if (!seen.insert(key).second) {
            throw ParseError(line_no, key, "duplicate key");
        }
        try {
            it->set(cfg, value);
        } catch (const std::exception& e) {
            throw ParseError(line_no, key, e.what());
        }
    }

    // Mapping hyperparameters default to the generator's.
    if (!seen.count("gp.kernel")) cfg.map_kernel.family = cfg.field_kernel.family;
    if (!seen.count("gp.signal_variance")) cfg.map_kernel.hyper.signal_variance = cfg.field_kernel.hyper.signal_variance;
    if (!seen.count("gp.length_scale_m")) cfg.map_kernel.hyper.length_scale = cfg.field_kernel.hyper.length_scale;
    if (!seen.count("gp.noise_variance")) cfg.map_kernel.hyper.noise_variance = cfg.field_kernel.hyper.noise_variance;

    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(0, "", "cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace amap

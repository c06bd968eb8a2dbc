#include "spemb/spemb.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "spemb/error.hpp"
#include "spemb/experiment.hpp"
#include "spemb/util.hpp"

struct spemb_manifold {
  spemb::ManifoldPtr ptr;
};
struct spemb_symbol {
  spemb::SchwartzSymbol sym;
};
struct spemb_coeffs {
  spemb::SpectralCoefficients c;
};
struct spemb_config {
  spemb::ExperimentConfig cfg;
};

namespace {

thread_local std::string t_last_error;

spemb_status to_status(spemb::ErrorCode code) {
  switch (code) {
    case spemb::ErrorCode::config: return SPEMB_ERR_CONFIG;
    case spemb::ErrorCode::data: return SPEMB_ERR_DATA;
    case spemb::ErrorCode::resolution: return SPEMB_ERR_RESOLUTION;
    case spemb::ErrorCode::unsupported: return SPEMB_ERR_UNSUPPORTED;
    case spemb::ErrorCode::domain: return SPEMB_ERR_DOMAIN;
    case spemb::ErrorCode::io: return SPEMB_ERR_IO;
    case spemb::ErrorCode::internal: return SPEMB_ERR_INTERNAL;
  }
  return SPEMB_ERR_INTERNAL;
}

template <class F>
spemb_status guarded(F&& fn) {
  try {
    fn();
    t_last_error.clear();
    return SPEMB_OK;
  } catch (const spemb::Error& e) {
    t_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    t_last_error = "out of memory";
    return SPEMB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return SPEMB_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return SPEMB_ERR_INTERNAL;
  }
}

spemb_status bad_argument(const char* what) {
  t_last_error = std::string("invalid argument: ") + what;
  return SPEMB_ERR_ARGUMENT;
}

}  // namespace

extern "C" {

const char* spemb_version(void) { return spemb::kToolVersion; }
const char* spemb_last_error(void) { return t_last_error.c_str(); }

const char* spemb_status_name(spemb_status status) {
  switch (status) {
    case SPEMB_OK: return "ok";
    case SPEMB_ERR_CONFIG: return "config";
    case SPEMB_ERR_DATA: return "data";
    case SPEMB_ERR_RESOLUTION: return "resolution";
    case SPEMB_ERR_UNSUPPORTED: return "unsupported";
    case SPEMB_ERR_DOMAIN: return "domain";
    case SPEMB_ERR_IO: return "io";
    case SPEMB_ERR_INTERNAL: return "internal";
    case SPEMB_ERR_ARGUMENT: return "argument";
  }
  return "unknown";
}

void spemb_set_jobs(unsigned jobs) { spemb::set_jobs(jobs); }

spemb_status spemb_manifold_create(const char* name, spemb_manifold** out) {
  if (!name || !out) return bad_argument("null pointer");
  return guarded([&] { *out = new spemb_manifold{spemb::make_manifold(name)}; });
}

void spemb_manifold_destroy(spemb_manifold* m) { delete m; }

spemb_status spemb_manifold_dim(const spemb_manifold* m, int* out) {
  if (!m || !out) return bad_argument("null pointer");
  return guarded([&] { *out = m->ptr->dim(); });
}

spemb_status spemb_manifold_eigenvalue(const spemb_manifold* m, size_t n, double* out) {
  if (!m || !out) return bad_argument("null pointer");
  return guarded([&] { *out = m->ptr->eigenvalue(n); });
}

spemb_status spemb_manifold_modes_below(const spemb_manifold* m, double lambda, size_t* out) {
  if (!m || !out) return bad_argument("null pointer");
  return guarded([&] { *out = m->ptr->modes_below(lambda); });
}

spemb_status spemb_weyl_count(const spemb_manifold* m, double lambda, int64_t* out) {
  if (!m || !out) return bad_argument("null pointer");
  return guarded([&] { *out = m->ptr->weyl_count(lambda); });
}

spemb_status spemb_weyl_asymptotic(const spemb_manifold* m, double lambda, double* out) {
  if (!m || !out) return bad_argument("null pointer");
  return guarded([&] { *out = m->ptr->weyl_asymptotic(lambda); });
}

spemb_status spemb_symbol_plateau(double t, int exponent, double end_ratio, spemb_symbol** out) {
  if (!out) return bad_argument("null pointer");
  return guarded([&] { *out = new spemb_symbol{spemb::plateau_symbol(t, {exponent, end_ratio})}; });
}

spemb_status spemb_symbol_heat(spemb_symbol** out) {
  if (!out) return bad_argument("null pointer");
  return guarded([&] { *out = new spemb_symbol{spemb::heat_symbol()}; });
}

spemb_status spemb_symbol_taylor(int order, spemb_symbol** out) {
  if (!out) return bad_argument("null pointer");
  return guarded([&] { *out = new spemb_symbol{spemb::taylor_symbol(order)}; });
}

spemb_status spemb_symbol_zero(spemb_symbol** out) {
  if (!out) return bad_argument("null pointer");
  return guarded([&] { *out = new spemb_symbol{spemb::zero_symbol()}; });
}

void spemb_symbol_destroy(spemb_symbol* s) { delete s; }

spemb_status spemb_symbol_evaluate(const spemb_symbol* s, double x, double* out) {
  if (!s || !out) return bad_argument("null pointer");
  return guarded([&] { *out = s->sym.evaluate(x); });
}

spemb_status spemb_symbol_derivative(const spemb_symbol* s, int order, double x, double* out) {
  if (!s || !out) return bad_argument("null pointer");
  return guarded([&] { *out = s->sym.derivative(order, x); });
}

spemb_status spemb_catalog(const spemb_manifold* m, const char* spec_json, size_t cutoff, spemb_coeffs** out) {
  if (!m || !spec_json || !out) return bad_argument("null pointer");
  return guarded([&] {
    const spemb::DistributionSpec spec = spemb::parse_distribution_text(spec_json);
    *out = new spemb_coeffs{spemb::distribution_catalog(m->ptr, spec, cutoff)};
  });
}

spemb_status spemb_apply_symbol(const spemb_symbol* s, double eps, const spemb_coeffs* u, spemb_coeffs** out) {
  if (!s || !u || !out) return bad_argument("null pointer");
  if (!(eps > 0.0 && eps <= 1.0)) return bad_argument("eps must lie in (0, 1]");
  return guarded([&] {
    const spemb::SymbolNet net = spemb::SymbolNet::plain(s->sym);
    *out = new spemb_coeffs{spemb::apply_symbol(net, eps, u->c)};
  });
}

void spemb_coeffs_destroy(spemb_coeffs* c) { delete c; }

spemb_status spemb_coeffs_size(const spemb_coeffs* c, size_t* out) {
  if (!c || !out) return bad_argument("null pointer");
  *out = c->c.cutoff();
  t_last_error.clear();
  return SPEMB_OK;
}

spemb_status spemb_coeffs_get(const spemb_coeffs* c, size_t n, double* re, double* im) {
  if (!c || !re || !im) return bad_argument("null pointer");
  if (n >= c->c.cutoff()) return bad_argument("mode index out of range");
  *re = c->c.coeffs()[n].real();
  *im = c->c.coeffs()[n].imag();
  t_last_error.clear();
  return SPEMB_OK;
}

spemb_status spemb_sobolev_norm(const spemb_coeffs* c, double j, double* out) {
  if (!c || !out) return bad_argument("null pointer");
  return guarded([&] { *out = spemb::sobolev_norm(c->c, j); });
}

spemb_status spemb_config_load(const char* path, spemb_config** out) {
  if (!path || !out) return bad_argument("null pointer");
  return guarded([&] { *out = new spemb_config{spemb::load_config(path)}; });
}

spemb_status spemb_config_parse(const char* text, int is_json, spemb_config** out) {
  if (!text || !out) return bad_argument("null pointer");
  return guarded([&] { *out = new spemb_config{spemb::parse_config(text, is_json != 0)}; });
}

spemb_status spemb_config_set(spemb_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return bad_argument("null pointer");
  return guarded([&] {
    spemb::Overrides ov;
    const std::string k = key;
    if (k == "output") {
      ov.output = value;
    } else if (k == "seed") {
      std::size_t used = 0;
      unsigned long long s = 0;
      try {
        s = std::stoull(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || value[used] != '\0') throw spemb::Error(spemb::ErrorCode::config, "seed must be a nonnegative integer");
      ov.seed = s;
    } else if (k == "grid") {
      ov.grid = value;
    } else if (k == "battery") {
      ov.battery = value;
    } else {
      throw spemb::Error(spemb::ErrorCode::config, "unknown override '" + k + "'");
    }
    // Validate on a copy so a rejected override leaves the config untouched.
    spemb::ExperimentConfig next = cfg->cfg;
    spemb::apply_overrides(next, ov);
    cfg->cfg = std::move(next);
  });
}

spemb_status spemb_config_hash(const spemb_config* cfg, char* buf, size_t len) {
  if (!cfg || !buf) return bad_argument("null pointer");
  if (len < 17) return bad_argument("hash buffer needs 17 bytes");
  return guarded([&] {
    const std::string h = spemb::config_hash(cfg->cfg);
    std::memcpy(buf, h.c_str(), h.size() + 1);
  });
}

void spemb_config_destroy(spemb_config* cfg) { delete cfg; }

spemb_status spemb_run(const spemb_config* cfg, const char* verb, const char* property, const char* expect_fail,
                       int* exit_code) {
  if (!cfg || !verb || !exit_code) return bad_argument("null pointer");
  return guarded([&] {
    const std::string v = verb;
    std::optional<std::string> expect;
    if (expect_fail && *expect_fail) expect = expect_fail;
    if (expect && v != "verify") throw spemb::Error(spemb::ErrorCode::config, "--expect-fail applies to verify only");
    if (v == "spectrum") {
      *exit_code = spemb::cmd_spectrum(cfg->cfg);
    } else if (v == "embed") {
      *exit_code = spemb::cmd_embed(cfg->cfg);
    } else if (v == "verify") {
      if (!property || !*property) throw spemb::Error(spemb::ErrorCode::config, "verify needs a property");
      *exit_code = spemb::cmd_verify(cfg->cfg, property, expect);
    } else {
      throw spemb::Error(spemb::ErrorCode::config, "unknown verb '" + v + "'");
    }
  });
}

spemb_status spemb_report(const char* dir, int* exit_code) {
  if (!dir || !exit_code) return bad_argument("null pointer");
  return guarded([&] { *exit_code = spemb::cmd_report(dir); });
}

}  // extern "C"

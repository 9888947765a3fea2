#include "crs_array.h"

#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "crs/dataset.hpp"
#include "crs/error.hpp"
#include "crs/modes.hpp"
#include "crs/pipeline.hpp"
#include "crs/theory.hpp"

struct crs_dataset {
    crs::LabeledDataset ds;
    mutable std::string scratch;  // backs label/id pointers
};

namespace {

thread_local std::string g_last_error;

crs_status to_status(crs::ErrorCode code) {
    using crs::ErrorCode;
    switch (code) {
        case ErrorCode::Io: return CRS_ERR_IO;
        case ErrorCode::Schema: return CRS_ERR_SCHEMA;
        case ErrorCode::Parse: return CRS_ERR_PARSE;
        case ErrorCode::Shape: return CRS_ERR_SHAPE;
        case ErrorCode::Parameter: return CRS_ERR_PARAMETER;
        case ErrorCode::Stratification: return CRS_ERR_STRATIFICATION;
        case ErrorCode::DegenerateData: return CRS_ERR_DEGENERATE_DATA;
        case ErrorCode::Admission: return CRS_ERR_ADMISSION;
        case ErrorCode::DegenerateWeights: return CRS_ERR_DEGENERATE_WEIGHTS;
        case ErrorCode::Domain: return CRS_ERR_DOMAIN;
    }
    return CRS_ERR_INTERNAL;
}

template <typename Fn>
crs_status guard(Fn&& fn) {
    try {
        fn();
        return CRS_OK;
    } catch (const crs::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CRS_ERR_INTERNAL;
    }
}

nlohmann::json parse_config(const char* config_json) {
    if (config_json == nullptr || config_json[0] == '\0')
        return crs::resolve_config(nlohmann::json::object());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
        throw crs::Error(crs::ErrorCode::Parse, std::string("config JSON: ") + e.what());
    }
    return crs::resolve_config(doc);
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

extern "C" {

const char* crs_last_error(void) { return g_last_error.c_str(); }

crs_status crs_dataset_load_csv(const char* path, crs_dataset** out) {
    if (path == nullptr || out == nullptr) {
        g_last_error = "null argument";
        return CRS_ERR_INVALID_ARGUMENT;
    }
    return guard([&] { *out = new crs_dataset{crs::load_csv(path), {}}; });
}

crs_status crs_dataset_save_csv(const crs_dataset* ds, const char* path) {
    if (ds == nullptr || path == nullptr) {
        g_last_error = "null argument";
        return CRS_ERR_INVALID_ARGUMENT;
    }
    return guard([&] { crs::save_csv(ds->ds, path); });
}

void crs_dataset_free(crs_dataset* ds) { delete ds; }

size_t crs_dataset_rows(const crs_dataset* ds) { return ds ? ds->ds.rows() : 0; }

size_t crs_dataset_sensors(const crs_dataset* ds) { return ds ? ds->ds.sensor_count() : 0; }

const char* crs_dataset_label(const crs_dataset* ds, size_t row) {
    if (ds == nullptr || row >= ds->ds.rows()) return nullptr;
    ds->scratch = ds->ds.labels[row].canonical();
    return ds->scratch.c_str();
}

const char* crs_dataset_sensor_id(const crs_dataset* ds, size_t index) {
    if (ds == nullptr || index >= ds->ds.sensor_count()) return nullptr;
    return ds->ds.sensor_ids[index].c_str();
}

crs_status crs_run_synth(const char* config_json, const char* out_dir) {
    if (out_dir == nullptr) {
        g_last_error = "null out_dir";
        return CRS_ERR_INVALID_ARGUMENT;
    }
    return guard([&] { crs::run_synth(parse_config(config_json), out_dir); });
}

crs_status crs_run_pipeline(const char* config_json, const char* out_dir) {
    if (out_dir == nullptr) {
        g_last_error = "null out_dir";
        return CRS_ERR_INVALID_ARGUMENT;
    }
    return guard([&] { crs::run_pipeline(parse_config(config_json), out_dir); });
}

crs_status crs_run_theory(const char* config_json, const char* out_dir) {
    if (out_dir == nullptr) {
        g_last_error = "null out_dir";
        return CRS_ERR_INVALID_ARGUMENT;
    }
    return guard([&] { crs::run_theory(parse_config(config_json), out_dir); });
}

crs_status crs_run_report(const char* bundle_dir, char** out_text) {
    if (bundle_dir == nullptr || out_text == nullptr) {
        g_last_error = "null argument";
        return CRS_ERR_INVALID_ARGUMENT;
    }
    return guard([&] { *out_text = dup_string(crs::run_report(bundle_dir)); });
}

void crs_string_free(char* s) { delete[] s; }

crs_status crs_default_config(char** out_json) {
    if (out_json == nullptr) {
        g_last_error = "null argument";
        return CRS_ERR_INVALID_ARGUMENT;
    }
    return guard([&] { *out_json = dup_string(crs::default_config().dump(2) + "\n"); });
}

double crs_energy_savings(size_t active, size_t total) {
    double out = 0;
    guard([&] { out = crs::energy_savings(active, total); });
    return out;
}

double crs_analytic_capability(size_t n, double mu_frac, size_t m) {
    double out = 0;
    guard([&] {
        crs::CapabilityModel model;
        model.mu_frac = mu_frac;
        model.m = m;
        model.epsilon = 1.0 - mu_frac;
        out = crs::analytic_capability(n, model);
    });
    return out;
}

crs_status crs_min_sensors(double capability, double mu_frac, size_t m, size_t* out_n) {
    if (out_n == nullptr) {
        g_last_error = "null argument";
        return CRS_ERR_INVALID_ARGUMENT;
    }
    return guard([&] {
        crs::CapabilityModel model;
        model.mu_frac = mu_frac;
        model.m = m;
        model.epsilon = 1.0 - mu_frac;
        *out_n = crs::min_sensors(capability, model);
    });
}

} // extern "C"

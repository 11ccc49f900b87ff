//! C ABI over `mccp`.
//!
//! Every fallible function returns an [`MccpStatus`]; on failure the message
//! is kept per thread and can be copied out with [`mccp_last_error_message`].
//! Calibrations live behind the opaque [`MccpCalibration`] handle and must be
//! released with [`mccp_calibration_free`].
//!
//! Class labels crossing the boundary are 1-based, as in the file formats.
//! Score and plausibility matrices are row-major `n x k` arrays of doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mccp::aggregation::{aggregate_partial_rankings, aggregate_single_labels};
use mccp::conformal::{Calibration, EcdfMcCalibration, EcdfMcParams, ReferenceScores};
use mccp::io::{read_json, write_json};
use mccp::sampling::expand_calibration;
use mccp::{AnnotationRecord, ClassIndex, Error, Plausibilities, Ranking, ScoreTable, SeedSpec};

/// Status codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MccpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidPlausibilities = 3,
    LabelOutOfRange = 4,
    InvalidAnnotations = 5,
    AllMassExcluded = 6,
    ShapeMismatch = 7,
    SplitTooSmall = 8,
    EmptySample = 9,
    NonFiniteScore = 10,
    Io = 11,
    Parse = 12,
    WrongCalibrationForm = 13,
    Panic = 14,
}

/// Opaque calibration handle.
pub struct MccpCalibration {
    inner: Calibration,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn status_of(err: &Error) -> MccpStatus {
    match err {
        Error::EmptyPlausibilities | Error::NegativeMass { .. } | Error::NotNormalized { .. } => {
            MccpStatus::InvalidPlausibilities
        }
        Error::LabelOutOfRange { .. } => MccpStatus::LabelOutOfRange,
        Error::EmptyAnnotations
        | Error::OverlappingBlocks { .. }
        | Error::EmptyBlock { .. }
        | Error::ProcedureMismatch { .. }
        | Error::EmptyLabelSet
        | Error::DuplicateId(_) => MccpStatus::InvalidAnnotations,
        Error::AllMassExcluded => MccpStatus::AllMassExcluded,
        Error::ReplicateMismatch { .. } | Error::RowLength { .. } | Error::IdMismatch(_) => {
            MccpStatus::ShapeMismatch
        }
        Error::SplitTooSmall { .. } => MccpStatus::SplitTooSmall,
        Error::EmptySample => MccpStatus::EmptySample,
        Error::NonFiniteScore { .. } => MccpStatus::NonFiniteScore,
        Error::InvalidParameter { .. } | Error::Config { .. } => MccpStatus::InvalidArgument,
        Error::Parse { .. } => MccpStatus::Parse,
        Error::Io(_) => MccpStatus::Io,
    }
}

struct Failure(MccpStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure(status_of(&err), err.to_string())
    }
}

fn fail(status: MccpStatus, message: impl Into<String>) -> Failure {
    Failure(status, message.into())
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> MccpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            MccpStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(message);
            MccpStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(data: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(fail(MccpStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn slice_mut<'a, T>(data: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if data.is_null() {
        return Err(fail(MccpStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(data, len))
}

unsafe fn to_path<'a>(p: *const c_char) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(fail(MccpStatus::NullPointer, "path is null"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MccpStatus::InvalidArgument, "path is not UTF-8"))?;
    Ok(Path::new(s))
}

fn zero_based(labels: &[u32], classes: usize) -> Result<Vec<ClassIndex>, Failure> {
    labels
        .iter()
        .map(|&l| {
            if l == 0 || l as usize > classes {
                Err(Error::LabelOutOfRange {
                    label: l as i64,
                    classes,
                }
                .into())
            } else {
                Ok(l as usize - 1)
            }
        })
        .collect()
}

fn check_alpha(alpha: f64) -> Result<(), Failure> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(fail(MccpStatus::InvalidArgument, format!("alpha {alpha} not in (0, 1)")))
    }
}

fn matrix(data: &[f64], n: usize, k: usize) -> Vec<Vec<f64>> {
    data.chunks(k.max(1)).take(n).map(<[f64]>::to_vec).collect()
}

fn score_table(scores: &[f64], n: usize, k: usize) -> Result<ScoreTable, Failure> {
    let ids = (0..n).map(|i| i.to_string()).collect();
    Ok(ScoreTable::new(ids, matrix(scores, n, k))?)
}

fn plausibility_rows(data: &[f64], n: usize, k: usize) -> Result<Vec<Plausibilities>, Failure> {
    matrix(data, n, k)
        .into_iter()
        .map(|row| Plausibilities::new(row).map_err(Failure::from))
        .collect()
}

unsafe fn store(out: *mut *mut MccpCalibration, inner: Calibration) -> Result<(), Failure> {
    *out = Box::into_raw(Box::new(MccpCalibration { inner }));
    Ok(())
}

unsafe fn handle<'a>(h: *const MccpCalibration) -> Result<&'a Calibration, Failure> {
    h.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| fail(MccpStatus::NullPointer, "calibration handle is null"))
}

fn out_ptr<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(fail(MccpStatus::NullPointer, "output pointer is null"))
    } else {
        Ok(())
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mccp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length in bytes,
/// excluding the terminator; 0 when the last call succeeded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn mccp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Checks that `probs[0..k]` is a valid plausibility vector.
///
/// # Safety
/// `probs` must point to `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn mccp_validate_plausibilities(probs: *const f64, k: usize) -> MccpStatus {
    guard(|| {
        Plausibilities::new(slice(probs, k, "probs")?.to_vec())?;
        Ok(())
    })
}

/// Label frequencies of `p` single annotations (1-based) into `out[0..k]`.
///
/// # Safety
/// `labels` must point to `p` values and `out` to `k` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mccp_aggregate_single_labels(
    labels: *const u32,
    p: usize,
    k: usize,
    out: *mut f64,
) -> MccpStatus {
    guard(|| {
        let labels = zero_based(slice(labels, p, "labels")?, k)?;
        let out = slice_mut(out, k, "out")?;
        let lambda = aggregate_single_labels(&AnnotationRecord::single("ffi", labels), k)?;
        out.copy_from_slice(lambda.as_slice());
        Ok(())
    })
}

/// Inverse rank normalization of partial rankings into `out[0..k]`.
///
/// The rankings are flattened: `classes` holds every block's 1-based labels
/// back to back, `block_sizes[b]` is the size of block `b`, and
/// `ranking_sizes[q]` is the number of blocks in ranking `q`, best first.
/// Excluded classes are simply absent.
///
/// # Safety
/// Each pointer must reference the number of elements its length names, and
/// `out` must point to `k` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mccp_aggregate_rankings(
    classes: *const u32,
    num_classes_listed: usize,
    block_sizes: *const usize,
    num_blocks: usize,
    ranking_sizes: *const usize,
    num_rankings: usize,
    k: usize,
    out: *mut f64,
) -> MccpStatus {
    guard(|| {
        let labels = zero_based(slice(classes, num_classes_listed, "classes")?, k)?;
        let block_sizes = slice(block_sizes, num_blocks, "block_sizes")?;
        let ranking_sizes = slice(ranking_sizes, num_rankings, "ranking_sizes")?;
        let out = slice_mut(out, k, "out")?;
        if block_sizes.iter().sum::<usize>() != labels.len() || ranking_sizes.iter().sum::<usize>() != block_sizes.len() {
            return Err(fail(MccpStatus::ShapeMismatch, "block and ranking sizes do not add up"));
        }
        let mut rest = labels.as_slice();
        let mut blocks = Vec::with_capacity(block_sizes.len());
        for &size in block_sizes {
            let (head, tail) = rest.split_at(size);
            blocks.push(head.to_vec());
            rest = tail;
        }
        let mut blocks = blocks.into_iter();
        let rankings: Vec<Ranking> = ranking_sizes.iter().map(|&r| blocks.by_ref().take(r).collect()).collect();
        let lambda = aggregate_partial_rankings(&AnnotationRecord::rankings("ffi", rankings), k)?;
        out.copy_from_slice(lambda.as_slice());
        Ok(())
    })
}

/// Split p-value of `test_score` against `n` calibration scores.
///
/// # Safety
/// `calib_scores` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mccp_p_value(calib_scores: *const f64, n: usize, test_score: f64, out: *mut f64) -> MccpStatus {
    guard(|| {
        out_ptr(out)?;
        let reference = ReferenceScores::from_scores(slice(calib_scores, n, "calib_scores")?)?;
        *out = reference.p_value(test_score);
        Ok(())
    })
}

/// Split calibration from the scores of the calibration labels.
///
/// # Safety
/// `true_label_scores` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mccp_calibrate_split(
    true_label_scores: *const f64,
    n: usize,
    alpha: f64,
    out: *mut *mut MccpCalibration,
) -> MccpStatus {
    guard(|| {
        out_ptr(out)?;
        check_alpha(alpha)?;
        let reference = ReferenceScores::from_scores(slice(true_label_scores, n, "true_label_scores")?)?;
        store(out, Calibration::MonteCarlo { alpha, reference })
    })
}

/// Monte Carlo calibration: `m` pseudo-labels per row drawn from the
/// plausibilities with streams derived from `seed`.
///
/// # Safety
/// `scores` and `plausibilities` must each point to `n * k` doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn mccp_calibrate_mc(
    scores: *const f64,
    plausibilities: *const f64,
    n: usize,
    k: usize,
    m: usize,
    alpha: f64,
    seed: u64,
    out: *mut *mut MccpCalibration,
) -> MccpStatus {
    guard(|| {
        out_ptr(out)?;
        check_alpha(alpha)?;
        if n == 0 || k == 0 || m == 0 {
            return Err(fail(MccpStatus::InvalidArgument, "n, k and m must be positive"));
        }
        let table = score_table(slice(scores, n * k, "scores")?, n, k)?;
        let lambdas = plausibility_rows(slice(plausibilities, n * k, "plausibilities")?, n, k)?;
        let labels = expand_calibration(&lambdas, m, &SeedSpec::new(seed));
        let reference = ReferenceScores::from_replicates(&labels.gather_scores(&table)?);
        store(out, Calibration::MonteCarlo { alpha, reference })
    })
}

/// Monte Carlo calibration with the DKW-corrected empirical CDF: the first
/// `l` rows are references with `m` pseudo-labels each, the rest estimate the
/// CDF of averaged p-values.
///
/// # Safety
/// As for [`mccp_calibrate_mc`].
#[no_mangle]
pub unsafe extern "C" fn mccp_calibrate_ecdf_mc(
    scores: *const f64,
    plausibilities: *const f64,
    n: usize,
    k: usize,
    m: usize,
    l: usize,
    delta: f64,
    alpha: f64,
    seed: u64,
    out: *mut *mut MccpCalibration,
) -> MccpStatus {
    guard(|| {
        out_ptr(out)?;
        check_alpha(alpha)?;
        if n == 0 || k == 0 {
            return Err(fail(MccpStatus::InvalidArgument, "n and k must be positive"));
        }
        let table = score_table(slice(scores, n * k, "scores")?, n, k)?;
        let lambdas = plausibility_rows(slice(plausibilities, n * k, "plausibilities")?, n, k)?;
        let params = EcdfMcParams { m, split: l, delta };
        let calibration = EcdfMcCalibration::calibrate(&table, &lambdas, params, &SeedSpec::new(seed))?;
        store(out, Calibration::EcdfCorrected { alpha, calibration })
    })
}

/// Loads a calibration JSON file as written by the `mccp calibrate` command.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mccp_calibration_load(path: *const c_char, out: *mut *mut MccpCalibration) -> MccpStatus {
    guard(|| {
        out_ptr(out)?;
        let inner: Calibration = read_json(to_path(path)?)?;
        store(out, inner)
    })
}

/// Writes the calibration as JSON.
///
/// # Safety
/// `calibration` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mccp_calibration_save(calibration: *const MccpCalibration, path: *const c_char) -> MccpStatus {
    guard(|| {
        write_json(to_path(path)?, handle(calibration)?)?;
        Ok(())
    })
}

/// # Safety
/// `calibration` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mccp_calibration_alpha(calibration: *const MccpCalibration, out: *mut f64) -> MccpStatus {
    guard(|| {
        out_ptr(out)?;
        *out = handle(calibration)?.alpha();
        Ok(())
    })
}

/// Prediction set for one score row. `in_set[c]` becomes 1 for included
/// classes and 0 otherwise. When `p_values` is non-null it receives each
/// class's (possibly corrected) p-value, or NaN for threshold-only forms.
///
/// # Safety
/// `calibration` must be a live handle; `row` and `in_set` must point to `k`
/// elements, and `p_values` to `k` doubles when non-null.
#[no_mangle]
pub unsafe extern "C" fn mccp_predict(
    calibration: *const MccpCalibration,
    row: *const f64,
    k: usize,
    in_set: *mut u8,
    p_values: *mut f64,
) -> MccpStatus {
    guard(|| {
        let cal = handle(calibration)?;
        if matches!(cal, Calibration::Augmented { .. }) {
            return Err(fail(MccpStatus::WrongCalibrationForm, "augmented calibrations need replicate rows"));
        }
        let row = slice(row, k, "row")?;
        let in_set = slice_mut(in_set, k, "in_set")?;
        let set = cal.predict("ffi", row)?;
        in_set.fill(0);
        for &c in &set.classes {
            in_set[c] = 1;
        }
        if !p_values.is_null() {
            let out = slice_mut(p_values, k, "p_values")?;
            match &set.p_values {
                Some(p) => out.copy_from_slice(p),
                None => out.fill(f64::NAN),
            }
        }
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `calibration` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mccp_calibration_free(calibration: *mut MccpCalibration) {
    if !calibration.is_null() {
        drop(Box::from_raw(calibration));
    }
}

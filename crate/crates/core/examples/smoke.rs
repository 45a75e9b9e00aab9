use seprank_core::hermitian::builtin_state;
use seprank_core::moment::Scaling;
use seprank_core::program::SolverConfig;
use seprank_core::seprank::{sep_bound, SepBoundRequest, SepMode};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let name = &args[1];
    let t: usize = args[2].parse().unwrap();
    let scaling: Scaling = args[3].parse().unwrap();
    let mode: SepMode = args[4].parse().unwrap();
    let normalize: bool = args[5].parse().unwrap();
    let mut cfg = SolverConfig::default();
    cfg.apply_env();
    let st = builtin_state::<f64>(name).unwrap();
    let mut req = SepBoundRequest::new(st, t, scaling, mode);
    req.normalize_trace = normalize;
    let t0 = std::time::Instant::now();
    let res = sep_bound(&req, &cfg).unwrap();
    eprintln!(
        "{name} t={t} {scaling} {mode:?} norm={normalize}: status={} bound={:?} iters={} total={:.1}s [{}]",
        res.status,
        res.bound,
        res.solver_iterations,
        t0.elapsed().as_secs_f64(),
        res.solver_diagnostic
    );
}

use cvqkd::channel::ChannelParams;
use cvqkd::fock::{simulate_qs, simulate_qs_branch, simulate_spc, Branch, FockDims};
use cvqkd::protocols::{qs_cm_and_prob, signed_correlation, spc_cm_and_prob, ProtocolKind};
use std::time::Instant;

fn main() {
    let (v, t, eps, eta, g) = (1.5, 0.5, 0.02, 0.8, 1.5);
    let ch = ChannelParams::from_transmissivity(0.2, t, eps).unwrap();
    for dims in [FockDims { signal: 20 }, FockDims { signal: 40 }] {
        let t0 = Instant::now();
        let qs = simulate_qs(v, &ch, g, eta, &dims).unwrap();
        let (a, b, c) = qs.cm.block_form(1e-6).unwrap();
        let (cm, p) = qs_cm_and_prob(v, &ch, g, eta).unwrap();
        println!("QS  dim {}: sim  P={:.12} a={:.12} b={:.12} c={:.12} loss={:.2e}  [{:?}]",
                 dims.signal, qs.p_success, a, b, c, qs.truncation_loss, t0.elapsed());
        println!("          closed P={:.12} a={:.12} b={:.12} c={:.12}",
                 p, cm.a(), cm.b(), cm.c());
        let t0 = Instant::now();
        let spc = simulate_spc(v, &ch, g, eta, &dims).unwrap();
        let (a, b, c) = spc.cm.block_form(1e-6).unwrap();
        let (cm, p) = spc_cm_and_prob(v, &ch, g, eta).unwrap();
        let signed = signed_correlation(ProtocolKind::Spc, v, &ch, g, eta).unwrap();
        println!("SPC dim {}: sim  P={:.12} a={:.12} b={:.12} c={:.12} loss={:.2e}  [{:?}]",
                 dims.signal, spc.p_success, a, b, c, spc.truncation_loss, t0.elapsed());
        println!("          closed P={:.12} a={:.12} b={:.12} c={:+.12} (signed {:+.12})",
                 p, cm.a(), cm.b(), cm.c(), signed);
    }
    let off_on = simulate_qs_branch(v, &ch, g, eta, &FockDims { signal: 16 }, Branch::OffOn).unwrap();
    let (a, b, c) = off_on.cm.block_form(1e-6).unwrap();
    println!("QS off-on: a={a:.10} b={b:.10} c={c:+.10}");
}

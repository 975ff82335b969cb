use std::f64::consts::PI;

use qigate::gates::{azuma_spec, cnot_spec, cz_spec, truth_table};
use qigate::interrogation::{
    estimate_frequencies, exact_outcome_probabilities, run_joint_protocol, GateSpec, Theta,
    ThetaRule, Variant,
};
use qigate::statespace::{encode_qubits, encode_with, QubitState};

#[test]
fn zeno_success_grows_with_stage_count() {
    let input = encode_qubits(&QubitState::basis(1)).unwrap();
    let mut prev = 0.0;
    for n in 4..=4096u64 {
        let p = run_joint_protocol(&cz_spec(n, 1.0, 1).unwrap(), &input)
            .unwrap()
            .success_prob;
        assert!(p > prev, "not increasing at N = {n}");
        if n >= 64 {
            assert!(p > 1.0 - PI * PI / n as f64 - 1e-6, "N = {n}: {p}");
        }
        prev = p;
    }
}

#[test]
fn sampling_agrees_with_exact_engine() {
    let specs = [
        GateSpec::new(10, Theta::Rule(ThetaRule::PiOver2N)),
        cz_spec(50, 1.0, 1).unwrap(),
        cnot_spec(12, 0.7, 2).unwrap(),
        azuma_spec(8, 0.9, 1).unwrap(),
    ];
    let inputs = [
        QubitState::basis(1),
        QubitState::from_real([0.5, 0.5, 0.5, 0.5]).unwrap(),
        QubitState::from_real([0.0, 0.6, 0.8, 0.0]).unwrap(),
    ];
    let n = 100_000u64;
    for (k, spec) in specs.iter().enumerate() {
        for (j, q) in inputs.iter().enumerate() {
            let input = encode_with(q, spec.encoding()).unwrap();
            let exact = run_joint_protocol(spec, &input).unwrap();
            let probs = exact_outcome_probabilities(spec, &exact);
            let freqs = estimate_frequencies(spec, &input, n, 1000 + (4 * k + j) as u64).unwrap();
            assert_eq!(freqs.counts.values().sum::<u64>(), n);
            for o in freqs.counts.keys() {
                assert!(probs.contains_key(o), "spec {k}: impossible outcome {o}");
            }
            for (o, p) in &probs {
                let sigma = (p * (1.0 - p) / n as f64).sqrt();
                let got = freqs.frequency(o);
                assert!(
                    (got - p).abs() <= 3.0 * sigma + 1e-12,
                    "spec {k} input {j} outcome {o}: {got} vs {p}"
                );
            }
        }
    }
}

#[test]
fn azuma_switches_target_when_control_absent() {
    let spec = azuma_spec(40, 1.0, 1).unwrap();
    assert_eq!(spec.variant, Variant::Azuma);
    let rows = truth_table(&spec).unwrap();
    // |0⟩_C keeps the control outside: free evolution swaps B_u and B_d.
    assert!((rows[0].output.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
    assert!((rows[1].output.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    // |1⟩_C|1⟩_T is Zeno-protected and stays put.
    let z = (PI / 80.0).cos().powi(80);
    assert!((rows[3].success_prob - z).abs() < 1e-12);
    assert!(rows[2].forbidden());
    assert!(!rows[3].forbidden());
}

#[test]
fn cnot_truth_table_flips_target_for_control_one() {
    let rows = truth_table(&cnot_spec(200, 1.0, 1).unwrap()).unwrap();
    let dominant = |i: usize| {
        let amps = rows[i].output.amplitudes();
        (0..4)
            .max_by(|&a, &b| amps[a].norm().total_cmp(&amps[b].norm()))
            .unwrap()
    };
    assert_eq!(dominant(0), 0);
    assert_eq!(dominant(1), 1);
    assert_eq!(dominant(2), 3);
    assert_eq!(dominant(3), 2);
}

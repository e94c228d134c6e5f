use prefstab::corpus;

#[test]
fn built_in_examples_reproduce() {
    let checks = corpus::run(None);
    for c in &checks {
        println!("[{}] {} / {}: {}", if c.passed { "ok" } else { "FAIL" }, c.example, c.name, c.detail);
    }
    assert!(checks.iter().all(|c| c.passed));
}

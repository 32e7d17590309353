use gcgail::data::*;
fn main() {
    let cfg = GeneratorConfig::default();
    let (trips, profiles) = synthesize_population(&cfg, 0).unwrap();
    let out = extract_features(&trips, cfg.launch().unwrap(), &cfg.discount_set()).unwrap();
    let n = profiles.len() as f64;
    let adopters = profiles.iter().filter(|p| p.is_adopter()).count() as f64;
    println!("adopter fraction: {:.3}", adopters / n);
    let mut by_month = [0usize; 13];
    for p in &profiles { if let Some(m) = p.adoption_month { by_month[m as usize] += 1; } }
    println!("adoption months: {:?}", by_month);
    let attr = profiles.iter().filter(|p| p.attrition_month.is_some()).count();
    println!("attrition: {}", attr);
    use gcgail::data::AdopterType::*;
    for ty in [Early, Late, EarlyMorning, MorningPeak, Attrition, Sustained] {
        let c = profiles.iter().filter(|p| p.archetype.contains(&ty)).count();
        println!("{:?}: {}", ty, c);
    }
    // hazard spread by flex/con/dis quartile groups
    for (name, idx) in [("flex",0usize),("con",1),("dis",2)] {
        let mut frac = vec![];
        for g in 1..=4u8 {
            let sel: Vec<_> = out.trajectories.iter().filter(|t| t.condition.groups()[idx]==g).collect();
            let ad = sel.iter().filter(|t| profiles[t.pid as usize].is_adopter()).count() as f64;
            frac.push(format!("{:.2}", ad / sel.len().max(1) as f64));
        }
        println!("adopter frac by {} group: {:?}", name, frac);
    }
    // persistence baseline accuracy: predict action = lambda_t
    let mut correct = 0usize; let mut total = 0usize;
    for t in &out.trajectories { for o in &t.observations {
        total += 1;
        if (o.state.lambda_t as u8) == o.action.value() { correct += 1; }
    }}
    println!("persistence baseline acc: {:.4}", correct as f64 / total as f64);
    // action-1 share
    let ones: usize = out.trajectories.iter().flat_map(|t| &t.observations).filter(|o| o.action.value()==1).count();
    println!("action-1 share: {:.3}", ones as f64 / total as f64);
    let wu = out.trajectories.iter().filter(|t| t.observations[0].state.w_u).count();
    println!("w_u share: {:.3}", wu as f64 / out.trajectories.len() as f64);
}

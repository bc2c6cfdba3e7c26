package com.minipet.visits;

import com.minipet.pets.Pet;

public class VisitController {
    private VisitService visitService;

    public String bookVisit(Pet pet, String description) {
        Visit visit = visitService.schedule(pet, description);
        return "visits/" + visit.getPet().getName();
    }
}

package com.minipet.visits;

import java.util.List;

import com.minipet.owners.Owner;
import com.minipet.pets.Pet;
import com.minipet.pets.PetService;
import com.minipet.pets.PetType;

public class VisitService {
    private VisitRepository visits;
    private PetService petService;

    public Visit schedule(Pet pet, String description) {
        Visit visit = new Visit(pet, description);
        visits.save(visit);
        return visit;
    }

    public List<Visit> history(Pet pet) {
        return visits.findByPet(pet);
    }

    public Pet adoptAndVisit(Owner owner, String name) {
        Pet pet = petService.adopt(owner, name, PetType.DOG);
        schedule(pet, "first checkup");
        return pet;
    }
}

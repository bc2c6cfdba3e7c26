package com.minipet.pets;

import java.util.List;

import com.minipet.owners.Owner;

public class PetService {
    private PetRepository pets;

    public List<Pet> petsOf(Owner owner) {
        return pets.findByOwner(owner);
    }

    public Pet adopt(Owner owner, String name, PetType type) {
        Pet pet = new Pet(name, type);
        pet.setOwner(owner);
        pets.save(pet);
        return pet;
    }
}

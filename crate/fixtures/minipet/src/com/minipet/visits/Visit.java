package com.minipet.visits;

import com.minipet.pets.Pet;

public class Visit {
    private Pet pet;
    private String description;

    public Visit(Pet pet, String description) {
        this.pet = pet;
        this.description = description;
    }

    public Pet getPet() {
        return pet;
    }

    public String getDescription() {
        return description;
    }
}
